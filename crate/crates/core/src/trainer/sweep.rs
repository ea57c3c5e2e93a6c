//! Hyperparameter grids: train, capture, measure and estimate per cell.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{DatasetSpec, TrainTest};
use super::measures::compute_measures;
use super::mlp::MlpSpec;
use super::sgd::{capture, ConvergenceRule, TrainConfig};
use crate::dimension::{estimate_ph_dim, DimEstimate, EstimatorConfig};
use crate::error::{ensure, Result};
use crate::manifest::{Convergence, Manifest};
use crate::metricspace::{DistanceOracle, MetricKind};
use crate::seed;
use crate::stats::records::{Initialization, RecordTable, RunRecord};
use crate::trj1;

const STREAM_ESTIMATOR: u64 = 0xE5;
const STREAM_LABEL_NOISE: u64 = 0x1A;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub dataset: DatasetSpec,
    pub n_train: usize,
    pub data_seed: u64,
    /// Fraction of training labels reassigned at random before every cell.
    pub label_noise: f64,
    /// Hidden-layer count; every hidden layer has the cell's width.
    pub depth: usize,
    pub widths: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub init: Initialization,
    pub max_iterations: u64,
    /// `None` picks the rule matching the task.
    pub convergence: Option<ConvergenceRule>,
    pub capture_count: usize,
    pub capture_stride: usize,
    pub memory_budget_bytes: u64,
    /// Sizes, restarts and alpha; the seed is derived per cell. Empty sizes
    /// mean [`EstimatorConfig::default_sizes_for`] the capture count.
    pub estimator: EstimatorConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSpec::TwoMoons { noise: 0.1 },
            n_train: 200,
            data_seed: 0,
            label_noise: 0.0,
            depth: 1,
            widths: vec![16],
            learning_rates: vec![0.05, 0.1, 0.2],
            batch_sizes: vec![8, 16, 32],
            seeds: vec![0, 1],
            init: Initialization::Standard,
            max_iterations: 200_000,
            convergence: None,
            capture_count: 1000,
            capture_stride: 1,
            memory_budget_bytes: 2 << 30,
            estimator: EstimatorConfig::default().with_sample_sizes(Vec::new()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub width: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl SweepCell {
    pub fn run_id(&self, dataset: &str, init: Initialization) -> String {
        format!(
            "{dataset}-w{}-lr{}-b{}-s{}-{init}",
            self.width, self.learning_rate, self.batch_size, self.seed
        )
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.n_train >= 1, "n_train must be positive");
        ensure!((0.0..=1.0).contains(&self.label_noise), "label noise must be in [0, 1]");
        ensure!(self.depth >= 1, "depth must be at least 1");
        for (name, empty) in [
            ("widths", self.widths.is_empty()),
            ("learning_rates", self.learning_rates.is_empty()),
            ("batch_sizes", self.batch_sizes.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ] {
            ensure!(!empty, "{name} must not be empty");
        }
        ensure!(self.widths.iter().all(|&w| w >= 1), "widths must be positive");
        self.estimator.validate()
    }

    /// Cells in width, learning rate, batch size, seed order.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::new();
        for &width in &self.widths {
            for &learning_rate in &self.learning_rates {
                for &batch_size in &self.batch_sizes {
                    for &seed in &self.seeds {
                        out.push(SweepCell { width, learning_rate, batch_size, seed });
                    }
                }
            }
        }
        out
    }

    pub fn train_config(&self, cell: &SweepCell, spec: &MlpSpec) -> TrainConfig {
        TrainConfig {
            learning_rate: cell.learning_rate,
            batch_size: cell.batch_size,
            max_iterations: self.max_iterations,
            convergence: self.convergence.unwrap_or(ConvergenceRule::default_for(spec.task)),
            capture_count: self.capture_count,
            capture_stride: self.capture_stride,
            seed: cell.seed,
            init: self.init,
            memory_budget_bytes: self.memory_budget_bytes,
        }
    }

    pub fn estimator_config(&self, cell: &SweepCell, metric: MetricKind) -> EstimatorConfig {
        let mut cfg = self.estimator.clone().with_metric(metric).with_seed(seed::derive(
            cell.seed,
            &[STREAM_ESTIMATOR, cell.width as u64, cell.learning_rate.to_bits(), cell.batch_size as u64],
        ));
        if cfg.sample_sizes.is_empty() {
            cfg.sample_sizes = EstimatorConfig::default_sizes_for(self.capture_count);
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub cell: SweepCell,
    pub record: RunRecord,
    pub manifest: Manifest,
}

impl CellOutcome {
    pub fn failed(&self) -> bool {
        self.record.failure.is_some()
    }
}

fn base_record(cfg: &SweepConfig, cell: &SweepCell) -> RunRecord {
    RunRecord {
        run_id: cell.run_id(cfg.dataset.name(), cfg.init),
        learning_rate: Some(cell.learning_rate),
        batch_size: Some(cell.batch_size as u64),
        width: Some(cell.width as u64),
        seed: Some(cell.seed),
        dataset: Some(cfg.dataset.name().to_owned()),
        init: Some(cfg.init),
        ..Default::default()
    }
}

fn dims_json(est: &DimEstimate) -> serde_json::Value {
    serde_json::json!({
        "dimension": est.dimension,
        "slope": est.slope,
        "r_squared": est.r_squared,
        "degenerate": est.degenerate,
        "sample_sizes": est.sample_sizes,
        "seed": est.config.seed,
    })
}

/// Trains one cell and, with `out_dir`, writes its TRJ1 payloads and
/// manifest there. A failing cell still yields a record; its measures are
/// empty and the manifest carries the reason.
pub fn run_cell(cfg: &SweepConfig, data: &TrainTest, cell: &SweepCell, out_dir: Option<&Path>) -> CellOutcome {
    let mut record = base_record(cfg, cell);
    let mut manifest = Manifest::new(record.run_id.clone());
    manifest.seeds = BTreeMap::from([("data".to_owned(), cfg.data_seed), ("train".to_owned(), cell.seed)]);
    manifest.config = serde_json::json!({ "sweep": cfg, "cell": cell });
    manifest.notes.push(format!(
        "held-out split of {} samples, training set of {}",
        data.test.len(),
        data.train.len()
    ));

    if let Err(e) = fill_cell(cfg, data, cell, out_dir, &mut record, &mut manifest) {
        record.failure = Some(e.to_string());
        manifest.failure = Some(e.to_string());
    }
    if let Some(dir) = out_dir {
        let path = dir.join(format!("{}.manifest.json", record.run_id));
        if let Err(e) = manifest.write(&path) {
            record.failure.get_or_insert_with(|| e.to_string());
        }
    }
    CellOutcome { cell: *cell, record, manifest }
}

fn fill_cell(
    cfg: &SweepConfig,
    data: &TrainTest,
    cell: &SweepCell,
    out_dir: Option<&Path>,
    record: &mut RunRecord,
    manifest: &mut Manifest,
) -> Result<()> {
    let spec = MlpSpec::for_dataset(&data.train, &vec![cell.width; cfg.depth])?;
    let train_cfg = cfg.train_config(cell, &spec);
    let cap = capture(&spec, &data.train, &train_cfg)?;
    manifest.convergence = Some(Convergence { converged: true, iterations: cap.iterations_to_converge });

    if let Some(dir) = out_dir {
        let traj = format!("{}.traj.trj1", record.run_id);
        let loss = format!("{}.loss.trj1", record.run_id);
        trj1::write_trajectory(dir.join(&traj), &cap.trajectory)?;
        trj1::write_loss_matrix(dir.join(&loss), &cap.loss_matrix)?;
        manifest.trajectory = Some(traj);
        manifest.losses = Some(loss);
    }

    let m = compute_measures(&cap, &spec, &data.train, Some(&data.test), &train_cfg)?;
    record.norm = Some(m.final_norm);
    record.step_size = Some(m.mean_step_size);
    record.lb_ratio = Some(m.lr_batch_ratio);
    record.gap_loss = Some(m.gap_loss);
    record.gap_accuracy = m.gap_accuracy;
    record.test_accuracy = m.test_accuracy;
    manifest.measures = Some(serde_json::to_value(&m)?);

    let euc_cfg = cfg.estimator_config(cell, MetricKind::Euclidean);
    let loss_cfg = cfg.estimator_config(cell, MetricKind::LossBased);
    manifest.seeds.insert("estimator".to_owned(), euc_cfg.seed);
    let euc = estimate_ph_dim(&DistanceOracle::euclidean(&cap.trajectory).precompute()?, &euc_cfg)?;
    let loss = estimate_ph_dim(&DistanceOracle::loss_based(&cap.loss_matrix).precompute()?, &loss_cfg)?;
    record.dim_euclidean = euc.dimension;
    record.dim_loss = loss.dimension;
    for (name, est) in [("euclidean", &euc), ("loss_based", &loss)] {
        if let Some(d) = est.degenerate {
            manifest.notes.push(format!("{name} estimate degenerate: {}", d.describe()));
        }
    }
    manifest.dimensions = Some(serde_json::json!({ "euclidean": dims_json(&euc), "loss_based": dims_json(&loss) }));
    Ok(())
}

/// The train/test split shared by every cell of `cfg`.
pub fn build_data(cfg: &SweepConfig) -> Result<TrainTest> {
    let mut data = TrainTest::generate(&cfg.dataset, cfg.n_train, cfg.data_seed)?;
    if cfg.label_noise > 0.0 {
        data.train = data.train.with_label_noise(cfg.label_noise, seed::derive(cfg.data_seed, &[STREAM_LABEL_NOISE]))?;
    }
    Ok(data)
}

/// Runs every cell in parallel; output order follows [`SweepConfig::cells`].
/// With `out_dir`, also writes `records.csv` there.
pub fn grid_sweep(cfg: &SweepConfig, out_dir: Option<&Path>) -> Result<Vec<CellOutcome>> {
    cfg.validate()?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| crate::error::Error::io(dir, e))?;
    }
    let data = build_data(cfg)?;
    let outcomes: Vec<CellOutcome> =
        cfg.cells().par_iter().map(|cell| run_cell(cfg, &data, cell, out_dir)).collect();
    if let Some(dir) = out_dir {
        let records: Vec<RunRecord> = outcomes.iter().map(|o| o.record.clone()).collect();
        RecordTable::write(dir.join("records.csv"), &records)?;
    }
    Ok(outcomes)
}
