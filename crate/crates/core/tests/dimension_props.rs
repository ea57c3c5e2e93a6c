mod common;

use common::uniform_cube;
use phdim_core::dimension::{estimate_with_metric, Degeneracy};
use phdim_core::{estimate_ph_dim, fit_power_law, DistanceMatrix, DistanceOracle, EstimatorConfig, WeightTrajectory};

fn small_cfg(seed: u64) -> EstimatorConfig {
    EstimatorConfig::default().with_seed(seed).with_sample_sizes(EstimatorConfig::linear_grid(100, 600, 6))
}

fn dim_of(points: &[Vec<f64>], cfg: &EstimatorConfig) -> f64 {
    let traj = WeightTrajectory::from_rows(points).unwrap();
    estimate_ph_dim(&DistanceOracle::euclidean(&traj), cfg).unwrap().dimension.unwrap()
}

#[test]
fn deterministic_and_cache_independent() {
    let pts = uniform_cube(600, 2, 5);
    let traj = WeightTrajectory::from_rows(&pts).unwrap();
    let cfg = small_cfg(9);
    let a = estimate_ph_dim(&DistanceOracle::euclidean(&traj), &cfg).unwrap();
    let b = estimate_ph_dim(&DistanceOracle::euclidean(&traj), &cfg).unwrap();
    let c = estimate_ph_dim(&DistanceOracle::euclidean(&traj).precompute().unwrap(), &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other = estimate_ph_dim(&DistanceOracle::euclidean(&traj), &small_cfg(10)).unwrap();
    assert_ne!(a.e_values, other.e_values);
}

#[test]
fn invariant_under_scaling() {
    let pts = uniform_cube(600, 2, 6);
    let cfg = small_cfg(1);
    let base = dim_of(&pts, &cfg);
    for c in [1e-3, 7.5, 1e4] {
        let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| v * c).collect()).collect();
        assert!((dim_of(&scaled, &cfg) - base).abs() < 1e-9, "c = {c}");
    }
}

#[test]
fn invariant_under_rigid_motion_and_embedding() {
    let pts = uniform_cube(600, 2, 7);
    let cfg = small_cfg(2);
    let base = dim_of(&pts, &cfg);
    let (s, c) = 0.7f64.sin_cos();
    let moved: Vec<Vec<f64>> = pts.iter().map(|p| vec![c * p[0] - s * p[1] + 3.0, s * p[0] + c * p[1] - 1.0]).collect();
    assert!((dim_of(&moved, &cfg) - base).abs() < 1e-6);
    let embedded: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0], 0.0, p[1], 0.0, 0.0]).collect();
    assert_eq!(dim_of(&embedded, &cfg), base);
}

#[test]
fn sizes_beyond_the_sample_are_clipped() {
    let pts = uniform_cube(300, 1, 8);
    let traj = WeightTrajectory::from_rows(&pts).unwrap();
    let cfg = EstimatorConfig::default().with_sample_sizes(vec![100, 200, 300, 400, 500]);
    let est = estimate_ph_dim(&DistanceOracle::euclidean(&traj), &cfg).unwrap();
    assert_eq!(est.sample_sizes, [100, 200, 300]);
    // the default grid starts at 1000, so 300 points cannot support it
    assert!(estimate_ph_dim(&DistanceOracle::euclidean(&traj), &EstimatorConfig::default()).is_err());
}

#[test]
fn constant_cloud_is_zero_e() {
    let dm = DistanceMatrix::euclidean(&vec![vec![1.0, 2.0]; 200]);
    let est = estimate_with_metric(&dm, &small_cfg(0).with_sample_sizes(vec![50, 100, 200])).unwrap();
    assert_eq!(est.degenerate, Some(Degeneracy::ZeroE));
    assert_eq!(est.dimension, None);
}

#[test]
fn exact_power_law_inverts() {
    let sizes: Vec<usize> = (2..=10).map(|i| i * 500).collect();
    for alpha in [0.5, 1.0, 2.0] {
        for m in [0.1, 0.5, 0.9] {
            let e: Vec<f64> = sizes.iter().map(|&n| 3.0 * (n as f64).powf(m)).collect();
            let cfg = EstimatorConfig { alpha, ..Default::default() };
            let est = fit_power_law(&sizes, &e, &cfg).unwrap();
            assert!((est.dimension.unwrap() - alpha / (1.0 - m)).abs() < 1e-9);
        }
    }
}
