//! Plain minibatch SGD: constant step size, no momentum, no weight decay.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::mlp::{accumulate_gradient, check_params, evaluate, per_sample_losses, Evaluation, MlpSpec, Task, Workspace};
use crate::error::{ensure, Error, Result};
use crate::metricspace::{LossMatrix, WeightTrajectory};
use crate::seed;
use crate::stats::Initialization;

// Sub-stream tags for seed derivation.
const STREAM_INIT: u64 = 1;
const STREAM_SHUFFLE: u64 = 2;
const STREAM_ADV_LABELS: u64 = 3;
const STREAM_ADV_TRAIN: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ConvergenceRule {
    /// 100% training accuracy.
    TrainAccuracy,
    /// Mean training loss strictly below the threshold.
    LossBelow { threshold: f64 },
}

impl ConvergenceRule {
    /// 100% accuracy for classification, loss below `1e-3` for regression.
    pub fn default_for(task: Task) -> Self {
        match task {
            Task::Classification => ConvergenceRule::TrainAccuracy,
            Task::Regression => ConvergenceRule::LossBelow { threshold: 1e-3 },
        }
    }

    fn is_met(&self, eval: &Evaluation) -> bool {
        match *self {
            ConvergenceRule::TrainAccuracy => eval.accuracy == Some(1.0),
            ConvergenceRule::LossBelow { threshold } => eval.mean_loss < threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_iterations: u64,
    pub convergence: ConvergenceRule,
    /// Captured iterates after convergence.
    pub capture_count: usize,
    /// Keep every `capture_stride`-th post-convergence step.
    pub capture_stride: usize,
    pub seed: u64,
    pub init: Initialization,
    /// Upper bound on the bytes held by a capture (weights + losses).
    pub memory_budget_bytes: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            batch_size: 32,
            max_iterations: 100_000,
            convergence: ConvergenceRule::TrainAccuracy,
            capture_count: 5000,
            capture_stride: 1,
            seed: 0,
            init: Initialization::Standard,
            memory_budget_bytes: 2 << 30,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, data: &Dataset) -> Result<()> {
        ensure!(
            self.learning_rate > 0.0 && self.learning_rate.is_finite(),
            "learning rate must be positive, got {}",
            self.learning_rate
        );
        ensure!(self.batch_size >= 1, "batch size must be at least 1");
        ensure!(
            self.batch_size <= data.len(),
            "batch size {} exceeds the {} training samples",
            self.batch_size,
            data.len()
        );
        ensure!(self.capture_count >= 2, "capture count must be at least 2");
        ensure!(self.capture_stride >= 1, "capture stride must be at least 1");
        if self.convergence == ConvergenceRule::TrainAccuracy {
            ensure!(data.is_classification(), "the accuracy rule needs a classification dataset");
        }
        Ok(())
    }

    /// SGD steps between two full-dataset convergence checks (one epoch).
    pub fn check_interval(&self, data: &Dataset) -> u64 {
        data.len().div_ceil(self.batch_size) as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: Vec<f64>,
    /// SGD steps taken.
    pub iterations: u64,
    pub converged: bool,
}

/// SGD state that survives from training into capture.
struct Runner<'a> {
    spec: &'a MlpSpec,
    data: &'a Dataset,
    cfg: &'a TrainConfig,
    params: Vec<f64>,
    grad: Vec<f64>,
    ws: Workspace,
    rng: ChaCha8Rng,
    order: Vec<usize>,
    position: usize,
    iteration: u64,
}

impl<'a> Runner<'a> {
    fn new(spec: &'a MlpSpec, data: &'a Dataset, cfg: &'a TrainConfig, params: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        spec.check_dataset(data)?;
        cfg.validate(data)?;
        check_params(spec, &params)?;
        let n = params.len();
        Ok(Self {
            spec,
            data,
            cfg,
            params,
            grad: vec![0.0; n],
            ws: Workspace::default(),
            rng: seed::derived_rng(cfg.seed, &[STREAM_SHUFFLE]),
            order: (0..data.len()).collect(),
            position: data.len(),
            iteration: 0,
        })
    }

    /// One minibatch step; a fresh shuffle starts each epoch.
    fn step(&mut self) -> Result<()> {
        if self.position >= self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.position = 0;
        }
        let end = (self.position + self.cfg.batch_size).min(self.order.len());
        let batch = &self.order[self.position..end];
        self.position = end;

        self.grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for &i in batch {
            loss += accumulate_gradient(
                self.spec,
                &self.params,
                self.data.features(i),
                self.data.target(i),
                &mut self.grad,
                &mut self.ws,
            );
        }
        let scale = self.cfg.learning_rate / batch.len() as f64;
        loss /= batch.len() as f64;
        self.iteration += 1;
        if !loss.is_finite() {
            return Err(Error::Divergence { iteration: self.iteration, loss });
        }
        for (p, g) in self.params.iter_mut().zip(&self.grad) {
            *p -= scale * g;
        }
        if let Some(bad) = self.params.iter().find(|p| !p.is_finite()) {
            return Err(Error::Divergence { iteration: self.iteration, loss: *bad });
        }
        Ok(())
    }

    fn converged(&self) -> bool {
        self.cfg.convergence.is_met(&evaluate(self.spec, &self.params, self.data))
    }

    /// Steps until the convergence rule fires (checked once per epoch and
    /// before the first step) or the iteration cap is hit.
    fn run_to_convergence(&mut self) -> Result<bool> {
        let interval = self.cfg.check_interval(self.data);
        loop {
            if self.iteration.is_multiple_of(interval) && self.converged() {
                return Ok(true);
            }
            if self.iteration >= self.cfg.max_iterations {
                return Ok(self.converged());
            }
            self.step()?;
        }
    }
}

/// Standard initialization: uniform in `±1/√fan_in`, seeded.
pub fn standard_init(spec: &MlpSpec, seed: u64) -> Vec<f64> {
    spec.init_uniform(&mut seed::derived_rng(seed, &[STREAM_INIT]))
}

/// Runs SGD from `init` (or the standard initialization) until convergence
/// or the iteration cap.
pub fn train_to_convergence(
    spec: &MlpSpec,
    data: &Dataset,
    cfg: &TrainConfig,
    init: Option<Vec<f64>>,
) -> Result<TrainOutcome> {
    let params = init.unwrap_or_else(|| standard_init(spec, cfg.seed));
    let mut runner = Runner::new(spec, data, cfg, params)?;
    let converged = runner.run_to_convergence()?;
    Ok(TrainOutcome { params: runner.params, iterations: runner.iteration, converged })
}

/// Weights that memorize a label-shuffled copy of `data` to 100% training
/// accuracy, for use as the initialization of a second training phase.
pub fn adversarial_init(data: &Dataset, spec: &MlpSpec, cfg: &TrainConfig) -> Result<Vec<f64>> {
    ensure!(spec.task == Task::Classification, "adversarial initialization needs a classification task");
    let randomized = data.with_shuffled_labels(seed::derive(cfg.seed, &[STREAM_ADV_LABELS]))?;
    let pre = TrainConfig {
        convergence: ConvergenceRule::TrainAccuracy,
        init: Initialization::Standard,
        seed: seed::derive(cfg.seed, &[STREAM_ADV_TRAIN]),
        ..cfg.clone()
    };
    let outcome = train_to_convergence(spec, &randomized, &pre, None)?;
    if !outcome.converged {
        return Err(Error::NotConverged { iterations: outcome.iterations });
    }
    Ok(outcome.params)
}

/// Initial weights according to `cfg.init`.
pub fn initial_weights(spec: &MlpSpec, data: &Dataset, cfg: &TrainConfig) -> Result<Vec<f64>> {
    match cfg.init {
        Initialization::Standard => Ok(standard_init(spec, cfg.seed)),
        Initialization::Adversarial => adversarial_init(data, spec, cfg),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaptureResult {
    pub trajectory: WeightTrajectory,
    pub loss_matrix: LossMatrix,
    pub converged: bool,
    pub iterations_to_converge: u64,
}

impl CaptureResult {
    pub fn final_weights(&self) -> &[f64] {
        self.trajectory.row(self.trajectory.iterates() - 1)
    }
}

fn capture_bytes(spec: &MlpSpec, data: &Dataset, cfg: &TrainConfig) -> u64 {
    (cfg.capture_count as u64).saturating_mul((spec.param_count() + data.len()) as u64).saturating_mul(8)
}

/// Trains to convergence, then records `capture_count` post-convergence
/// iterates together with their per-sample training losses.
///
/// The convergence point itself is not among the captured rows.
pub fn capture(spec: &MlpSpec, data: &Dataset, cfg: &TrainConfig) -> Result<CaptureResult> {
    spec.check_dataset(data)?;
    cfg.validate(data)?;
    let needed = capture_bytes(spec, data, cfg);
    if needed > cfg.memory_budget_bytes {
        return Err(Error::Budget { needed, budget: cfg.memory_budget_bytes });
    }

    let init = initial_weights(spec, data, cfg)?;
    let mut runner = Runner::new(spec, data, cfg, init)?;
    if !runner.run_to_convergence()? {
        return Err(Error::NotConverged { iterations: runner.iteration });
    }
    let iterations_to_converge = runner.iteration;

    let d = spec.param_count();
    let n = data.len();
    let mut weights = Vec::with_capacity(cfg.capture_count * d);
    let mut losses = Vec::with_capacity(cfg.capture_count * n);
    for _ in 0..cfg.capture_count {
        for _ in 0..cfg.capture_stride {
            runner.step()?;
        }
        weights.extend_from_slice(&runner.params);
        losses.extend(per_sample_losses(spec, &runner.params, data));
    }
    Ok(CaptureResult {
        trajectory: WeightTrajectory::new(cfg.capture_count, d, weights)?,
        loss_matrix: LossMatrix::new(cfg.capture_count, n, losses)?,
        converged: true,
        iterations_to_converge,
    })
}
