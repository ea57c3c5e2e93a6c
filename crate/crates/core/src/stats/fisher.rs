//! Comparison of two Spearman coefficients through Fisher's z-transform.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{ensure, Result};

/// Variance inflation for Spearman coefficients: `Var(atanh ρ̂) ≈ 1.06 / (n - 3)`.
pub const SPEARMAN_VARIANCE_INFLATION: f64 = 1.06;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherZ {
    pub z: f64,
    /// Two-sided normal p-value.
    pub p_value: f64,
}

/// Tests `ρ₁ = ρ₂` for Spearman coefficients from independent samples.
pub fn fisher_z_compare(r1: f64, n1: usize, r2: f64, n2: usize) -> Result<FisherZ> {
    ensure!(r1.abs() < 1.0 && r2.abs() < 1.0, "coefficients must lie strictly inside (-1, 1)");
    ensure!(n1 > 3 && n2 > 3, "sample sizes must exceed 3 (got {n1}, {n2})");
    let se = (SPEARMAN_VARIANCE_INFLATION / (n1 - 3) as f64
        + SPEARMAN_VARIANCE_INFLATION / (n2 - 3) as f64)
        .sqrt();
    let z = (r1.atanh() - r2.atanh()) / se;
    let p_value = erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0);
    Ok(FisherZ { z, p_value })
}
