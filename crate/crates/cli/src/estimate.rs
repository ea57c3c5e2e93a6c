use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use phdim_core::manifest::Manifest;
use phdim_core::metricspace::MAX_PRECOMPUTED;
use phdim_core::{beta_diagnostic, estimate_ph_dim, trj1, DimEstimate, DistanceOracle, EstimatorConfig, MetricKind};
use serde::Serialize;

use crate::output::{csv_string, emit, json_string};
use crate::{usage, Status};

#[derive(Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    #[value(alias = "loss-based")]
    Loss,
}

impl From<MetricArg> for MetricKind {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Euclidean => MetricKind::Euclidean,
            MetricArg::Loss => MetricKind::LossBased,
        }
    }
}

#[derive(Args)]
pub struct EstimateArgs {
    /// TRJ1 weight trajectory.
    #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest")]
    traj: Option<PathBuf>,
    /// TRJ1 loss matrix; required for `--metric loss`.
    #[arg(long, conflicts_with = "manifest")]
    losses: Option<PathBuf>,
    /// Run manifest naming the trajectory and loss payloads.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "euclidean")]
    metric: MetricArg,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Comma-separated subsample sizes. Defaults to 1000..=5000 step 500,
    /// or nine sizes from k/5 to k when fewer than three of those fit.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report<S, E> {
    source: String,
    metric: MetricKind,
    alpha: f64,
    seed: u64,
    points: usize,
    restarts: usize,
    dimension: Option<f64>,
    slope: Option<f64>,
    intercept: Option<f64>,
    r_squared: Option<f64>,
    beta: Option<f64>,
    degenerate: Option<String>,
    sample_sizes: S,
    e_values: E,
}

fn joined<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

pub fn run(args: EstimateArgs) -> Result<Status> {
    if !(args.alpha > 0.0 && args.alpha.is_finite()) {
        return Err(usage(format!("--alpha must be positive, got {}", args.alpha)));
    }
    if args.restarts == 0 {
        return Err(usage("--restarts must be at least 1"));
    }
    let metric = MetricKind::from(args.metric);

    let (source, traj, losses) = match &args.manifest {
        Some(path) => {
            let loaded = Manifest::load(path)?;
            (path.display().to_string(), loaded.read_trajectory()?, loaded.read_losses()?)
        }
        None => {
            let path = args.traj.as_ref().expect("clap enforces --traj or --manifest");
            let losses = args.losses.as_ref().map(trj1::read_loss_matrix).transpose()?;
            (path.display().to_string(), trj1::read_trajectory(path)?, losses)
        }
    };
    if metric == MetricKind::LossBased && losses.is_none() {
        return Err(usage("--metric loss needs --losses or a manifest with a loss payload"));
    }

    let k = traj.iterates();
    let sizes = if args.sizes.is_empty() { EstimatorConfig::default_sizes_for(k) } else { args.sizes.clone() };
    let cfg = EstimatorConfig { alpha: args.alpha, sample_sizes: sizes, restarts_per_size: args.restarts, seed: args.seed, metric };
    cfg.validate()?;

    let mut oracle = DistanceOracle::for_kind(metric, &traj, losses.as_ref())?;
    if k <= MAX_PRECOMPUTED {
        oracle = oracle.precompute()?;
    }
    let est = estimate_ph_dim(&oracle, &cfg).with_context(|| format!("estimating {source}"))?;

    let text = render(&source, k, &est, args.json)?;
    emit(args.out.as_deref(), &text)?;
    match est.degenerate {
        Some(d) => {
            eprintln!("degenerate dimension: {}", d.describe());
            Ok(Status::Degenerate)
        }
        None => Ok(Status::Ok),
    }
}

fn report<S, E>(source: &str, points: usize, est: &DimEstimate, sample_sizes: S, e_values: E) -> Report<S, E> {
    Report {
        source: source.to_owned(),
        metric: est.config.metric,
        alpha: est.config.alpha,
        seed: est.config.seed,
        points,
        restarts: est.config.restarts_per_size,
        dimension: est.dimension,
        slope: est.slope,
        intercept: est.intercept,
        r_squared: est.r_squared,
        beta: beta_diagnostic(est).ok(),
        degenerate: est.degenerate.map(|d| d.describe().to_owned()),
        sample_sizes,
        e_values,
    }
}

fn render(source: &str, points: usize, est: &DimEstimate, json: bool) -> Result<String> {
    if json {
        json_string(&report(source, points, est, &est.sample_sizes, &est.e_values))
    } else {
        csv_string(&[report(source, points, est, joined(&est.sample_sizes), joined(&est.e_values))])
    }
}
