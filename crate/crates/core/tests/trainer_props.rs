mod common;

use common::count_by;
use phdim_core::manifest::Manifest;
use phdim_core::stats::records::Initialization;
use phdim_core::trainer::data::gaussian_blobs;
use phdim_core::trainer::{
    capture, compute_measures, evaluate, grid_sweep, ConvergenceRule, DatasetSpec, MlpSpec, SweepConfig, TrainConfig,
    TrainTest,
};

fn moons() -> (TrainTest, MlpSpec, TrainConfig) {
    let data = TrainTest::generate(&DatasetSpec::TwoMoons { noise: 0.2 }, 80, 4).unwrap();
    let spec = MlpSpec::for_dataset(&data.train, &[16]).unwrap();
    let cfg = TrainConfig { learning_rate: 0.2, batch_size: 8, capture_count: 40, seed: 9, ..Default::default() };
    (data, spec, cfg)
}

#[test]
fn capture_is_bit_identical_per_seed() {
    let (data, spec, cfg) = moons();
    let a = capture(&spec, &data.train, &cfg).unwrap();
    let b = capture(&spec, &data.train, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.trajectory.iterates(), 40);
    assert_eq!(a.loss_matrix.samples(), 80);
    assert!(a.loss_matrix.values().iter().all(|&l| l >= 0.0));
}

#[test]
fn measures_recheck() {
    let (data, spec, cfg) = moons();
    let cap = capture(&spec, &data.train, &cfg).unwrap();
    let m = compute_measures(&cap, &spec, &data.train, Some(&data.test), &cfg).unwrap();
    let last = cap.final_weights();
    let norm = last.iter().map(|w| w * w).sum::<f64>().sqrt();
    assert!((m.final_norm - norm).abs() <= 1e-12 * norm);
    let (tr, te) = (evaluate(&spec, last, &data.train), evaluate(&spec, last, &data.test));
    assert!((m.gap_loss - (te.mean_loss - tr.mean_loss).abs()).abs() <= 1e-10);
    assert_eq!(m.gap_loss, m.gap_loss_signed.abs());
    assert_eq!(m.gap_accuracy, m.gap_accuracy_signed.map(f64::abs));
}

#[test]
fn label_shuffle_preserves_the_multiset() {
    let data = gaussian_blobs(90, 3, 4, 1.0, 2).unwrap();
    let shuffled = data.with_shuffled_labels(17).unwrap();
    assert_ne!(data.labels(), shuffled.labels());
    assert_eq!(count_by(data.labels().unwrap().iter()), count_by(shuffled.labels().unwrap().iter()));
}

#[test]
fn regression_uses_the_loss_rule() {
    let data = TrainTest::generate(&DatasetSpec::Regression { noise: 0.0 }, 64, 1).unwrap();
    let spec = MlpSpec::for_dataset(&data.train, &[32]).unwrap();
    assert_eq!(ConvergenceRule::default_for(spec.task), ConvergenceRule::LossBelow { threshold: 1e-3 });
    let cfg = TrainConfig {
        learning_rate: 0.05,
        batch_size: 8,
        convergence: ConvergenceRule::LossBelow { threshold: 0.05 },
        capture_count: 10,
        seed: 1,
        ..Default::default()
    };
    let cap = capture(&spec, &data.train, &cfg).unwrap();
    let m = compute_measures(&cap, &spec, &data.train, Some(&data.test), &cfg).unwrap();
    assert_eq!(m.gap_accuracy, None);
    assert_eq!(m.test_accuracy, None);
}

#[test]
fn single_cell_sweep_writes_a_complete_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SweepConfig {
        dataset: DatasetSpec::Blobs { classes: 2, dim: 20, spread: 1.0 },
        n_train: 60,
        widths: vec![32],
        learning_rates: vec![0.1],
        batch_sizes: vec![10],
        seeds: vec![0],
        capture_count: 50,
        init: Initialization::Adversarial,
        ..Default::default()
    };
    let out = grid_sweep(&cfg, Some(dir.path())).unwrap();
    assert_eq!(out.len(), 1);
    let rec = &out[0].record;
    assert_eq!(rec.init, Some(Initialization::Adversarial));
    assert!(rec.failure.is_none(), "{:?}", rec.failure);
    assert!(rec.dim_euclidean.unwrap().is_finite() && rec.dim_loss.unwrap().is_finite());

    let loaded = Manifest::load(dir.path().join(format!("{}.manifest.json", rec.run_id))).unwrap();
    let traj = loaded.read_trajectory().unwrap();
    let losses = loaded.read_losses().unwrap().unwrap();
    assert_eq!((traj.iterates(), losses.iterates(), losses.samples()), (50, 50, 60));
    assert!(loaded.manifest.dimensions.is_some());
    assert!(dir.path().join("records.csv").is_file());
}
