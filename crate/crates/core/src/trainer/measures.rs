use serde::{Deserialize, Serialize};

use super::data::Dataset;
use super::mlp::{evaluate, MlpSpec};
use super::sgd::{CaptureResult, TrainConfig};
use crate::error::{Error, Result};

/// Companion measures of one captured run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measures {
    /// ℓ² norm of the last captured iterate.
    pub final_norm: f64,
    /// Mean ℓ² distance between consecutive captured iterates.
    pub mean_step_size: f64,
    pub lr_batch_ratio: f64,
    pub train_loss: f64,
    pub test_loss: f64,
    /// `|test_loss - train_loss|`.
    pub gap_loss: f64,
    /// `test_loss - train_loss`.
    pub gap_loss_signed: f64,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    /// `|train_accuracy - test_accuracy|`.
    pub gap_accuracy: Option<f64>,
    /// `train_accuracy - test_accuracy`.
    pub gap_accuracy_signed: Option<f64>,
}

pub fn compute_measures(
    capture: &CaptureResult,
    spec: &MlpSpec,
    train: &Dataset,
    test: Option<&Dataset>,
    cfg: &TrainConfig,
) -> Result<Measures> {
    let test = test.ok_or_else(|| Error::InvalidArgument("measures need a held-out evaluation set".into()))?;
    if !capture.converged {
        return Err(Error::InvalidState("measures need a converged capture".into()));
    }
    let traj = &capture.trajectory;
    let last = capture.final_weights();
    let final_norm = last.iter().map(|w| w * w).sum::<f64>().sqrt();

    let steps: f64 = traj
        .rows()
        .zip(traj.rows().skip(1))
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
        .sum();
    let mean_step_size = steps / (traj.iterates() - 1) as f64;

    let tr = evaluate(spec, last, train);
    let te = evaluate(spec, last, test);
    let gap_accuracy_signed = tr.accuracy.zip(te.accuracy).map(|(a, b)| a - b);
    Ok(Measures {
        final_norm,
        mean_step_size,
        lr_batch_ratio: cfg.learning_rate / cfg.batch_size as f64,
        train_loss: tr.mean_loss,
        test_loss: te.mean_loss,
        gap_loss: (te.mean_loss - tr.mean_loss).abs(),
        gap_loss_signed: te.mean_loss - tr.mean_loss,
        train_accuracy: tr.accuracy,
        test_accuracy: te.accuracy,
        gap_accuracy: gap_accuracy_signed.map(f64::abs),
        gap_accuracy_signed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metricspace::{LossMatrix, WeightTrajectory};
    use crate::trainer::data::xor;

    fn fake_capture(rows: &[[f64; 7]]) -> CaptureResult {
        CaptureResult {
            trajectory: WeightTrajectory::from_rows(rows).unwrap(),
            loss_matrix: LossMatrix::new(rows.len(), 1, vec![0.0; rows.len()]).unwrap(),
            converged: true,
            iterations_to_converge: 0,
        }
    }

    fn setup() -> (MlpSpec, Dataset, TrainConfig) {
        let data = xor();
        // 2 -> 1 -> 2 has 7 parameters
        let spec = MlpSpec::new(vec![2, 1, 2], crate::trainer::mlp::Task::Classification).unwrap();
        assert_eq!(spec.param_count(), 7);
        let cfg = TrainConfig { learning_rate: 0.1, batch_size: 32, ..Default::default() };
        (spec, data, cfg)
    }

    #[test]
    fn constant_trajectory_has_zero_step_size() {
        let (spec, data, cfg) = setup();
        let cap = fake_capture(&[[0.5; 7]; 4]);
        let m = compute_measures(&cap, &spec, &data, Some(&data), &cfg).unwrap();
        assert_eq!(m.mean_step_size, 0.0);
        assert_eq!(m.lr_batch_ratio, 0.003125);
        assert_eq!(m.gap_loss, 0.0);
    }

    #[test]
    fn final_norm_of_last_iterate() {
        let (spec, data, cfg) = setup();
        let mut last = [0.0; 7];
        last[0] = 3.0;
        last[1] = 4.0;
        let cap = fake_capture(&[[0.0; 7], last]);
        let m = compute_measures(&cap, &spec, &data, Some(&data), &cfg).unwrap();
        assert_eq!(m.final_norm, 5.0);
        assert_eq!(m.mean_step_size, 5.0);
    }

    #[test]
    fn missing_test_set() {
        let (spec, data, cfg) = setup();
        let cap = fake_capture(&[[0.0; 7]; 2]);
        assert!(matches!(compute_measures(&cap, &spec, &data, None, &cfg), Err(Error::InvalidArgument(_))));
    }
}
