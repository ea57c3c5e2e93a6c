//! Partial rank correlation with a residual-permutation p-value.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rank::{average_ranks, kendall_tau_b, pearson};
use crate::error::{ensure, Error, Result};
use crate::seed;

/// Minimum permutation count accepted by the permutation tests.
pub const MIN_PERMUTATIONS: usize = 99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationKind {
    Spearman,
    Kendall,
}

impl std::fmt::Display for CorrelationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CorrelationKind::Spearman => "spearman",
            CorrelationKind::Kendall => "kendall",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialCorrelation {
    pub coefficient: f64,
    pub p_value: f64,
    pub permutations: usize,
    /// Set when a residual vector was (numerically) constant; the
    /// coefficient is then reported as 0.
    pub degenerate_residuals: bool,
}

/// Residuals of an OLS fit of `v` on `[1, Z]`.
fn residualize(v: &[f64], design: &DMatrix<f64>, q: &DMatrix<f64>) -> Vec<f64> {
    let y = DVector::from_column_slice(v);
    let fitted = q * (q.transpose() * &y);
    debug_assert_eq!(design.nrows(), v.len());
    y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect()
}

fn coefficient(kind: CorrelationKind, a: &[f64], b: &[f64]) -> Result<f64> {
    match kind {
        CorrelationKind::Spearman => pearson(a, b),
        CorrelationKind::Kendall => kendall_tau_b(a, b),
    }
}

/// `a ≥ b` up to a relative rounding allowance, so permuted statistics that
/// equal the observed one mathematically are counted as exceeding it.
pub(crate) fn at_least(a: f64, b: f64) -> bool {
    a >= b - 1e-12 * b.abs()
}

fn is_flat(v: &[f64], scale: f64) -> bool {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    max <= 1e-12 * scale.max(1.0)
}

/// Partial Spearman / Kendall correlation of `x` and `y` given the columns
/// of `z`.
///
/// `x` and `y` are rank-transformed and each regressed by least squares on
/// an intercept plus `z`; the chosen coefficient is computed between the two
/// residual vectors (Pearson for Spearman, τ-b for Kendall). The p-value
/// permutes the x-residuals `permutations` times:
/// `p = (1 + #{|c_perm| ≥ |c_obs|}) / (1 + B)`.
///
/// With no conditioning columns the residuals are the ranks themselves
/// (centering changes neither coefficient), so the result equals the plain
/// coefficient.
pub fn partial_corr(
    x: &[f64],
    y: &[f64],
    z: &[Vec<f64>],
    kind: CorrelationKind,
    permutations: usize,
    seed: u64,
) -> Result<PartialCorrelation> {
    let n = x.len();
    ensure!(y.len() == n, "length mismatch: {} vs {}", n, y.len());
    ensure!(permutations >= MIN_PERMUTATIONS, "need at least {MIN_PERMUTATIONS} permutations, got {permutations}");
    for (c, col) in z.iter().enumerate() {
        ensure!(col.len() == n, "conditioning column {c} has length {}, expected {n}", col.len());
    }
    ensure!(n >= z.len() + 3, "{n} observations are too few for {} conditioning columns", z.len());
    if x.iter().chain(y).chain(z.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite observation".into()));
    }

    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let (res_x, res_y) = if z.is_empty() {
        (rx, ry)
    } else {
        let design = DMatrix::from_fn(n, z.len() + 1, |i, j| if j == 0 { 1.0 } else { z[j - 1][i] });
        let qr = design.clone().qr();
        let r = qr.r();
        let diag: Vec<f64> = (0..r.ncols()).map(|i| r[(i, i)].abs()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        if diag.iter().any(|&d| d <= max * 1e-10 * n as f64) {
            return Err(Error::InvalidArgument(
                "conditioning columns are rank-deficient after adding an intercept".into(),
            ));
        }
        let q = qr.q();
        (residualize(&rx, &design, &q), residualize(&ry, &design, &q))
    };

    let degenerate = |r: &[f64]| is_flat(r, n as f64);
    let observed = if degenerate(&res_x) || degenerate(&res_y) {
        None
    } else {
        match coefficient(kind, &res_x, &res_y) {
            Ok(c) => Some(c),
            Err(Error::Degenerate(_)) => None,
            Err(e) => return Err(e),
        }
    };
    let Some(observed) = observed else {
        return Ok(PartialCorrelation {
            coefficient: 0.0,
            p_value: 1.0,
            permutations,
            degenerate_residuals: true,
        });
    };

    let exceed = (0..permutations)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed::derived_rng(seed, &[b as u64]);
            let mut perm = res_x.clone();
            perm.shuffle(&mut rng);
            let c = coefficient(kind, &perm, &res_y).unwrap_or(0.0);
            usize::from(at_least(c.abs(), observed.abs()))
        })
        .sum::<usize>();

    Ok(PartialCorrelation {
        coefficient: observed,
        p_value: (1 + exceed) as f64 / (1 + permutations) as f64,
        permutations,
        degenerate_residuals: false,
    })
}
