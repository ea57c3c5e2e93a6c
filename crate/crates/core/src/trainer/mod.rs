//! Small fully connected networks trained with plain minibatch SGD, and the
//! capture of their post-convergence trajectories.

pub mod data;
pub mod measures;
pub mod mlp;
pub mod sgd;
pub mod sweep;

pub use data::{Dataset, DatasetSpec, TrainTest};
pub use measures::{compute_measures, Measures};
pub use mlp::{evaluate, per_sample_losses, MlpSpec, Task};
pub use sgd::{
    adversarial_init, capture, initial_weights, standard_init, train_to_convergence, CaptureResult,
    ConvergenceRule, TrainConfig, TrainOutcome,
};
pub use sweep::{build_data, grid_sweep, run_cell, CellOutcome, SweepCell, SweepConfig};
