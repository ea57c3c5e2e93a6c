use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use phdim_core::stats::Initialization;
use phdim_core::trainer::{grid_sweep, CellOutcome, ConvergenceRule, DatasetSpec, SweepConfig};
use phdim_core::EstimatorConfig;

use crate::{usage, Status};

#[derive(Clone, Copy, ValueEnum)]
pub enum DatasetArg {
    TwoMoons,
    Blobs,
    Regression,
    Xor,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum InitArg {
    Standard,
    Adversarial,
}

#[derive(Args)]
pub struct DataArgs {
    #[arg(long, value_enum, default_value = "two-moons")]
    dataset: DatasetArg,
    /// Feature noise for two-moons and regression.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Blob classes.
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Blob input dimension.
    #[arg(long, default_value_t = 2)]
    input_dim: usize,
    /// Blob standard deviation.
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    /// Training samples; a held-out split of the same size is drawn too.
    #[arg(long, default_value_t = 200)]
    n_train: usize,
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    /// Fraction of training labels reassigned at random.
    #[arg(long, default_value_t = 0.0)]
    label_noise: f64,
}

#[derive(Args)]
pub struct RunArgs {
    /// Hidden layers, each of the cell's width.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long, value_enum, default_value = "standard")]
    init: InitArg,
    #[arg(long, default_value_t = 200_000)]
    max_iterations: u64,
    /// Train-loss threshold; defaults to 100% train accuracy for
    /// classification and loss < 1e-3 for regression.
    #[arg(long)]
    loss_threshold: Option<f64>,
    #[arg(long, default_value_t = 5000)]
    capture_count: usize,
    #[arg(long, default_value_t = 1)]
    capture_stride: usize,
    #[arg(long, default_value_t = 2048)]
    memory_budget_mib: u64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Comma-separated estimator subsample sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    /// Directory receiving TRJ1 payloads, manifests and records.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 16)]
    width: usize,
    #[arg(long)]
    lr: f64,
    #[arg(long)]
    batch_size: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_delimiter = ',', default_value = "16")]
    widths: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    lrs: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    batch_sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
}

fn build(data: &DataArgs, run: &RunArgs, widths: Vec<usize>, lrs: Vec<f64>, batches: Vec<usize>, seeds: Vec<u64>) -> Result<SweepConfig> {
    if let Some(lr) = lrs.iter().find(|lr| !(**lr > 0.0 && lr.is_finite())) {
        return Err(usage(format!("learning rates must be positive, got {lr}")));
    }
    if batches.contains(&0) || widths.contains(&0) {
        return Err(usage("batch sizes and widths must be positive"));
    }
    if run.capture_count < 2 {
        return Err(usage("--capture-count must be at least 2"));
    }
    let dataset = match data.dataset {
        DatasetArg::TwoMoons => DatasetSpec::TwoMoons { noise: data.noise },
        DatasetArg::Blobs => DatasetSpec::Blobs { classes: data.classes, dim: data.input_dim, spread: data.spread },
        DatasetArg::Regression => DatasetSpec::Regression { noise: data.noise },
        DatasetArg::Xor => DatasetSpec::Xor,
    };
    let estimator = EstimatorConfig {
        alpha: run.alpha,
        sample_sizes: run.sizes.clone(),
        restarts_per_size: run.restarts,
        ..Default::default()
    };
    let cfg = SweepConfig {
        dataset,
        n_train: data.n_train,
        data_seed: data.data_seed,
        label_noise: data.label_noise,
        depth: run.depth,
        widths,
        learning_rates: lrs,
        batch_sizes: batches,
        seeds,
        init: match run.init {
            InitArg::Standard => Initialization::Standard,
            InitArg::Adversarial => Initialization::Adversarial,
        },
        max_iterations: run.max_iterations,
        convergence: run.loss_threshold.map(|threshold| ConvergenceRule::LossBelow { threshold }),
        capture_count: run.capture_count,
        capture_stride: run.capture_stride,
        memory_budget_bytes: run.memory_budget_mib << 20,
        estimator,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"))
}

fn execute(cfg: &SweepConfig, run: &RunArgs) -> Result<Status> {
    let outcomes = grid_sweep(cfg, Some(&run.out_dir))?;
    for CellOutcome { record: r, .. } in &outcomes {
        match &r.failure {
            None => println!(
                "{}\tok\tdim_euclidean={}\tdim_loss={}\tgap_accuracy={}\tgap_loss={}",
                r.run_id,
                fmt_opt(r.dim_euclidean),
                fmt_opt(r.dim_loss),
                fmt_opt(r.gap_accuracy),
                fmt_opt(r.gap_loss)
            ),
            Some(reason) => println!("{}\tfailed\t{reason}", r.run_id),
        }
    }
    let ok = outcomes.iter().filter(|o| !o.failed()).count();
    println!("{ok}/{} cells succeeded; records in {}", outcomes.len(), run.out_dir.join("records.csv").display());
    if ok == 0 {
        bail!("every cell failed");
    }
    Ok(Status::Ok)
}

pub fn run_train(args: TrainArgs) -> Result<Status> {
    let cfg = build(&args.data, &args.run, vec![args.width], vec![args.lr], vec![args.batch_size], vec![args.seed])?;
    execute(&cfg, &args.run)
}

pub fn run_sweep(args: SweepArgs) -> Result<Status> {
    let cfg = build(&args.data, &args.run, args.widths, args.lrs, args.batch_sizes, args.seeds)?;
    execute(&cfg, &args.run)
}
