use phdim_core::{euclidean_dist, loss_pseudo_dist, DistanceOracle, LossMatrix, PointMetric, WeightTrajectory};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..10.0f64, cols), rows)
}

proptest! {
    #[test]
    fn loss_pseudometric_axioms(rows in (3usize..12, 1usize..20).prop_flat_map(|(k, n)| matrix(k, n))) {
        let lm = LossMatrix::from_rows(&rows).unwrap();
        let k = lm.iterates();
        for i in 0..k {
            prop_assert_eq!(loss_pseudo_dist(&lm, i, i).unwrap(), 0.0);
            for j in 0..k {
                let d = loss_pseudo_dist(&lm, i, j).unwrap();
                prop_assert!(d >= 0.0);
                prop_assert_eq!(d, loss_pseudo_dist(&lm, j, i).unwrap());
                for m in 0..k {
                    let via = d + loss_pseudo_dist(&lm, j, m).unwrap();
                    prop_assert!(loss_pseudo_dist(&lm, i, m).unwrap() <= via * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn loss_distance_invariant_under_sample_permutation(
        rows in (2usize..8, 2usize..16).prop_flat_map(|(k, n)| matrix(k, n)),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let n = rows[0].len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut phdim_core::seed::rng(seed));
        let permuted: Vec<Vec<f64>> = rows.iter().map(|r| perm.iter().map(|&c| r[c]).collect()).collect();
        let a = LossMatrix::from_rows(&rows).unwrap();
        let b = LossMatrix::from_rows(&permuted).unwrap();
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                let (x, y) = (loss_pseudo_dist(&a, i, j).unwrap(), loss_pseudo_dist(&b, i, j).unwrap());
                prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
            }
        }
    }

    #[test]
    fn euclidean_matches_naive_and_precomputed(rows in (2usize..10, 1usize..30).prop_flat_map(|(k, d)| matrix(k, d))) {
        let traj = WeightTrajectory::from_rows(&rows).unwrap();
        let oracle = DistanceOracle::euclidean(&traj);
        let cached = DistanceOracle::euclidean(&traj).precompute().unwrap();
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                let naive = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let d = euclidean_dist(&traj, i, j).unwrap();
                prop_assert!((d - naive).abs() <= 1e-12 * naive.max(1.0));
                prop_assert_eq!(oracle.dist(i, j), cached.dist(i, j));
            }
        }
    }
}

#[test]
fn identical_loss_rows_are_at_distance_zero() {
    // distinct weights with the same per-sample losses
    let lm = LossMatrix::from_rows(&[[0.5, 1.0], [0.5, 1.0], [0.0, 2.0]]).unwrap();
    assert_eq!(loss_pseudo_dist(&lm, 0, 1).unwrap(), 0.0);
    assert_eq!(loss_pseudo_dist(&lm, 0, 2).unwrap(), 0.75);
    assert!(loss_pseudo_dist(&lm, 0, 3).is_err());
}
