use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use phdim_core::stats::{analyze, report, AnalyzeRequest, CorrelationKind, Method, RecordTable};

use crate::output::{emit, json_string};
use crate::Status;

#[derive(Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Spearman,
    Kendall,
    Granulated,
    FisherZ,
    Partial,
    Cmi,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Spearman => Method::Spearman,
            MethodArg::Kendall => Method::Kendall,
            MethodArg::Granulated => Method::Granulated,
            MethodArg::FisherZ => Method::FisherZ,
            MethodArg::Partial => Method::Partial,
            MethodArg::Cmi => Method::Cmi,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum KindArg {
    Spearman,
    Kendall,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Run-record CSV.
    #[arg(long)]
    records: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Measure column, e.g. dim_euclidean.
    #[arg(long)]
    measure: String,
    /// Target column, e.g. gap_accuracy.
    #[arg(long)]
    target: String,
    /// Second measure compared against `--measure` by fisher-z.
    #[arg(long, required_if_eq("method", "fisher-z"))]
    compare: Option<String>,
    /// Hyperparameter axes for granulated.
    #[arg(long, value_delimiter = ',', default_value = "learning_rate,batch_size")]
    axes: Vec<String>,
    /// Conditioning columns for partial and cmi.
    #[arg(long, value_delimiter = ',', required_if_eq_any([("method", "partial"), ("method", "cmi")]))]
    condition: Vec<String>,
    /// Emit one row per level of this column.
    #[arg(long)]
    group_by: Option<String>,
    /// Coefficients reported by partial.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "spearman,kendall")]
    kinds: Vec<KindArg>,
    #[arg(long, default_value_t = 999)]
    permutations: usize,
    /// Equal-frequency bins for cmi.
    #[arg(long, default_value_t = 5)]
    bins: usize,
    /// Seed for the permutation tests.
    #[arg(long, required_if_eq_any([("method", "partial"), ("method", "cmi")]))]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: AnalyzeArgs) -> Result<Status> {
    let table = RecordTable::read(&args.records)?;
    let mut req = AnalyzeRequest::new(args.method.into(), &args.measure, &args.target, args.seed.unwrap_or(0));
    req.compare = args.compare;
    req.axes = args.axes;
    req.condition = args.condition;
    req.group_by = args.group_by;
    req.kinds = args
        .kinds
        .iter()
        .map(|k| match k {
            KindArg::Spearman => CorrelationKind::Spearman,
            KindArg::Kendall => CorrelationKind::Kendall,
        })
        .collect();
    req.permutations = args.permutations;
    req.bins = args.bins;

    let rows = analyze(&table, &req)?;
    let text = if args.json { json_string(&rows)? } else { report::to_csv_string(&rows)? };
    emit(args.out.as_deref(), &text)?;

    for row in rows.iter().filter(|r| r.diagnostic.is_some()) {
        eprintln!("{}: {}", row.group.as_deref().unwrap_or("all"), row.diagnostic.as_deref().unwrap_or_default());
    }
    if !rows.is_empty() && rows.iter().all(|r| r.value.is_none()) {
        return Ok(Status::Degenerate);
    }
    Ok(Status::Ok)
}
