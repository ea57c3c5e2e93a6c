//! Correlation and conditional-independence statistics over run records.

pub mod analyze;
pub mod cmi;
pub mod fisher;
pub mod granulated;
pub mod partial;
pub mod rank;
pub mod records;
pub mod report;

pub use analyze::{analyze, AnalyzeRequest};
pub use cmi::{cmi_discrete, cmi_local_perm_test, equal_frequency_bins, CmiTest};
pub use fisher::{fisher_z_compare, FisherZ};
pub use granulated::{granulated_kendall, AxisScore, GranulatedKendall};
pub use partial::{partial_corr, CorrelationKind, PartialCorrelation};
pub use rank::{average_ranks, kendall_tau_b, pearson, spearman};
pub use records::{Initialization, RecordTable, RunRecord};
pub use report::{CorrelationReport, Method};
