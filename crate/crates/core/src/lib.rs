//! PH⁰ dimension estimates of optimization trajectories, and the statistics
//! used to judge such measures against the generalization gap.
//!
//! The pipeline is:
//!
//! 1. [`metricspace`] holds a weight trajectory and its per-sample loss matrix
//!    and exposes the Euclidean and loss-based distance oracles.
//! 2. [`ph0`] turns a finite (pseudo)metric space into its 0-dimensional
//!    barcode via a dense Prim MST and evaluates `E_α`.
//! 3. [`dimension`] regresses `log E` on `log n` over growing subsamples and
//!    reports `α / (1 - m)`.
//! 4. [`trainer`] produces trajectories from small MLPs trained with plain SGD.
//! 5. [`stats`] evaluates measures against the gap (rank correlations,
//!    granulated Kendall, Fisher z, partial correlation, CMI tests).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimension;
pub mod error;
pub mod io;
pub mod manifest;
pub mod metricspace;
pub mod ph0;
pub mod seed;
pub mod stats;
pub mod trainer;
pub mod trj1;

pub use dimension::{beta_diagnostic, estimate_ph_dim, fit_power_law, DimEstimate, EstimatorConfig};
pub use error::{Error, Result};
pub use metricspace::{
    euclidean_dist, loss_pseudo_dist, subsample_indices, DistanceMatrix, DistanceOracle, LossMatrix,
    MetricKind, PointMetric, WeightTrajectory,
};
pub use ph0::{e_alpha, mst, vr_ph0_bruteforce, Barcode0, MstResult};
