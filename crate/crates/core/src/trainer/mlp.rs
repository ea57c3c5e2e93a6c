//! Fully-connected ReLU network over a flat parameter vector.
//!
//! Parameters are stored layer by layer: the `out × in` weight matrix
//! (row-major) followed by the `out` biases.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::{Dataset, Target};
use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Softmax cross-entropy.
    Classification,
    /// Mean squared error over output dimensions.
    Regression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    /// Input width, hidden widths, output width.
    pub layer_widths: Vec<usize>,
    pub task: Task,
}

impl MlpSpec {
    pub fn new(layer_widths: Vec<usize>, task: Task) -> Result<Self> {
        let spec = Self { layer_widths, task };
        spec.validate()?;
        Ok(spec)
    }

    /// Input/output widths taken from `data`, with the given hidden widths.
    pub fn for_dataset(data: &Dataset, hidden: &[usize]) -> Result<Self> {
        let mut widths = vec![data.input_dim()];
        widths.extend_from_slice(hidden);
        widths.push(data.output_dim());
        let task = if data.is_classification() { Task::Classification } else { Task::Regression };
        Self::new(widths, task)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.layer_widths.len() >= 3, "an MLP needs at least one hidden layer");
        ensure!(self.layer_widths.iter().all(|&w| w >= 1), "layer widths must be at least 1");
        if self.task == Task::Classification {
            ensure!(*self.layer_widths.last().unwrap() >= 2, "classification needs at least 2 outputs");
        }
        Ok(())
    }

    /// Copy with every hidden width multiplied by `factor`.
    pub fn with_width_multiplier(&self, factor: usize) -> Result<Self> {
        ensure!(factor >= 1, "width multiplier must be at least 1");
        let last = self.layer_widths.len() - 1;
        let widths = self
            .layer_widths
            .iter()
            .enumerate()
            .map(|(i, &w)| if i == 0 || i == last { w } else { w * factor })
            .collect();
        Self::new(widths, self.task)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_widths.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.layer_widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn check_dataset(&self, data: &Dataset) -> Result<()> {
        ensure!(
            data.input_dim() == self.input_dim(),
            "dataset has {} features, network expects {}",
            data.input_dim(),
            self.input_dim()
        );
        ensure!(
            data.output_dim() == self.output_dim(),
            "dataset needs {} outputs, network has {}",
            data.output_dim(),
            self.output_dim()
        );
        ensure!(
            data.is_classification() == (self.task == Task::Classification),
            "dataset and network disagree on the task"
        );
        Ok(())
    }

    /// Uniform weights and biases in `±1/√fan_in`.
    pub fn init_uniform(&self, rng: &mut impl Rng) -> Vec<f64> {
        let mut params = Vec::with_capacity(self.param_count());
        for w in self.layer_widths.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            for _ in 0..(w[0] * w[1] + w[1]) {
                params.push(rng.random_range(-bound..=bound));
            }
        }
        params
    }
}

/// Reusable buffers for forward/backward passes.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    /// Post-activation values per layer; entry 0 is the input.
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

fn forward<'w>(spec: &MlpSpec, params: &[f64], x: &[f64], ws: &'w mut Workspace) -> &'w [f64] {
    let layers = spec.layer_widths.len() - 1;
    ws.acts.resize(layers + 1, Vec::new());
    ws.acts[0].clear();
    ws.acts[0].extend_from_slice(x);
    let mut offset = 0;
    for l in 0..layers {
        let (n_in, n_out) = (spec.layer_widths[l], spec.layer_widths[l + 1]);
        let weights = &params[offset..offset + n_in * n_out];
        let bias = &params[offset + n_in * n_out..offset + n_in * n_out + n_out];
        offset += n_in * n_out + n_out;
        let (prev, rest) = ws.acts.split_at_mut(l + 1);
        let input = &prev[l];
        let out = &mut rest[0];
        out.clear();
        for o in 0..n_out {
            let row = &weights[o * n_in..(o + 1) * n_in];
            let mut z = bias[o];
            for (w, a) in row.iter().zip(input) {
                z += w * a;
            }
            out.push(if l + 1 < layers { z.max(0.0) } else { z });
        }
    }
    &ws.acts[layers]
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + v.iter().map(|z| (z - max).exp()).sum::<f64>().ln()
}

fn loss_of(task: Task, output: &[f64], target: Target<'_>) -> f64 {
    match (task, target) {
        (Task::Classification, Target::Class(c)) => log_sum_exp(output) - output[c],
        (Task::Regression, Target::Value(t)) => {
            output.iter().zip(t).map(|(o, y)| (o - y) * (o - y)).sum::<f64>() / output.len() as f64
        }
        _ => unreachable!("task/target mismatch is rejected by check_dataset"),
    }
}

/// Loss of a single sample.
pub fn sample_loss(spec: &MlpSpec, params: &[f64], x: &[f64], target: Target<'_>, ws: &mut Workspace) -> f64 {
    let out = forward(spec, params, x, ws);
    loss_of(spec.task, out, target)
}

fn predicts(output: &[f64], target: Target<'_>) -> bool {
    let Target::Class(c) = target else { return false };
    let argmax = output
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0;
    argmax == c
}

/// Adds the gradient of one sample's loss to `grad` and returns the loss.
pub fn accumulate_gradient(
    spec: &MlpSpec,
    params: &[f64],
    x: &[f64],
    target: Target<'_>,
    grad: &mut [f64],
    ws: &mut Workspace,
) -> f64 {
    let layers = spec.layer_widths.len() - 1;
    forward(spec, params, x, ws);
    let loss = loss_of(spec.task, &ws.acts[layers], target);

    ws.deltas.resize(layers + 1, Vec::new());
    {
        let out = &ws.acts[layers];
        let delta = &mut ws.deltas[layers];
        delta.clear();
        match (spec.task, target) {
            (Task::Classification, Target::Class(c)) => {
                let lse = log_sum_exp(out);
                delta.extend(out.iter().enumerate().map(|(i, z)| (z - lse).exp() - f64::from(u8::from(i == c))));
            }
            (Task::Regression, Target::Value(t)) => {
                let scale = 2.0 / out.len() as f64;
                delta.extend(out.iter().zip(t).map(|(o, y)| scale * (o - y)));
            }
            _ => unreachable!("task/target mismatch is rejected by check_dataset"),
        }
    }

    let mut offsets = Vec::with_capacity(layers);
    let mut offset = 0;
    for w in spec.layer_widths.windows(2) {
        offsets.push(offset);
        offset += w[0] * w[1] + w[1];
    }

    for l in (0..layers).rev() {
        let (n_in, n_out) = (spec.layer_widths[l], spec.layer_widths[l + 1]);
        let off = offsets[l];
        let (lower, upper) = ws.deltas.split_at_mut(l + 1);
        let delta = &upper[0];
        let input = &ws.acts[l];
        for o in 0..n_out {
            let d = delta[o];
            if d == 0.0 {
                continue;
            }
            let row = &mut grad[off + o * n_in..off + (o + 1) * n_in];
            for (g, a) in row.iter_mut().zip(input) {
                *g += d * a;
            }
            grad[off + n_in * n_out + o] += d;
        }
        if l > 0 {
            let weights = &params[off..off + n_in * n_out];
            let prev = &mut lower[l];
            prev.clear();
            prev.resize(n_in, 0.0);
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                for (p, w) in prev.iter_mut().zip(&weights[o * n_in..(o + 1) * n_in]) {
                    *p += d * w;
                }
            }
            for (p, a) in prev.iter_mut().zip(input) {
                if *a <= 0.0 {
                    *p = 0.0;
                }
            }
        }
    }
    loss
}

/// Mean loss and (for classification) accuracy over a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub mean_loss: f64,
    pub accuracy: Option<f64>,
}

pub fn evaluate(spec: &MlpSpec, params: &[f64], data: &Dataset) -> Evaluation {
    let mut ws = Workspace::default();
    let mut total = 0.0;
    let mut correct = 0usize;
    for i in 0..data.len() {
        let target = data.target(i);
        let out = forward(spec, params, data.features(i), &mut ws);
        total += loss_of(spec.task, out, target);
        correct += usize::from(predicts(out, target));
    }
    let n = data.len() as f64;
    Evaluation {
        mean_loss: total / n,
        accuracy: data.is_classification().then(|| correct as f64 / n),
    }
}

/// `ℓ(w, z_j)` for every sample `j`.
pub fn per_sample_losses(spec: &MlpSpec, params: &[f64], data: &Dataset) -> Vec<f64> {
    let mut ws = Workspace::default();
    (0..data.len())
        .map(|i| sample_loss(spec, params, data.features(i), data.target(i), &mut ws))
        .collect()
}

pub(crate) fn check_params(spec: &MlpSpec, params: &[f64]) -> Result<()> {
    if params.len() != spec.param_count() {
        return Err(Error::InvalidArgument(format!(
            "{} parameters given, network has {}",
            params.len(),
            spec.param_count()
        )));
    }
    Ok(())
}
