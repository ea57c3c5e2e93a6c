//! PH⁰ dimension by power-law regression.
//!
//! For each sample size `n` the estimator draws `restarts_per_size` uniform
//! subsamples, averages `E_α` of their barcodes, fits
//! `log Ē = m · log n + b` by least squares and reports `α / (1 - m)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::metricspace::{subsample_indices, DistanceOracle, MetricKind, PointMetric};
use crate::ph0::{e_alpha, mst};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub alpha: f64,
    pub sample_sizes: Vec<usize>,
    pub restarts_per_size: usize,
    pub seed: u64,
    pub metric: MetricKind,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            sample_sizes: (2..=10).map(|i| i * 500).collect(),
            restarts_per_size: 5,
            seed: 0,
            metric: MetricKind::Euclidean,
        }
    }
}

impl EstimatorConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_metric(mut self, metric: MetricKind) -> Self {
        self.metric = metric;
        self
    }

    pub fn with_sample_sizes(mut self, sizes: Vec<usize>) -> Self {
        self.sample_sizes = sizes;
        self
    }

    /// `count` sizes evenly spaced from `lo` to `hi` inclusive, rounded down
    /// and deduplicated.
    pub fn linear_grid(lo: usize, hi: usize, count: usize) -> Vec<usize> {
        if count <= 1 || hi <= lo {
            return vec![hi];
        }
        let step = (hi - lo) as f64 / (count - 1) as f64;
        let mut sizes: Vec<usize> =
            (0..count).map(|i| lo + (step * i as f64).floor() as usize).collect();
        *sizes.last_mut().unwrap() = hi;
        sizes.dedup();
        sizes
    }

    /// Nine sizes from `k / 5` to `k`, for trajectories shorter than the
    /// default grid.
    pub fn scaled_grid(k: usize) -> Vec<usize> {
        Self::linear_grid((k / 5).max(2), k, 9)
    }

    /// The default grid when at least three of its sizes fit in `k` points,
    /// otherwise [`scaled_grid`](Self::scaled_grid).
    pub fn default_sizes_for(k: usize) -> Vec<usize> {
        let sizes = Self::default().clipped_sizes(k);
        if sizes.len() >= 3 {
            sizes
        } else {
            Self::scaled_grid(k)
        }
    }

    /// Sample sizes that fit in `k` points; larger ones are dropped, never
    /// extrapolated.
    pub fn clipped_sizes(&self, k: usize) -> Vec<usize> {
        self.sample_sizes.iter().copied().filter(|&n| n <= k).collect()
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.alpha > 0.0 && self.alpha.is_finite(), "alpha must be positive, got {}", self.alpha);
        ensure!(self.restarts_per_size >= 1, "restarts_per_size must be at least 1");
        ensure!(
            self.sample_sizes.windows(2).all(|w| w[0] < w[1]),
            "sample sizes must be strictly ascending: {:?}",
            self.sample_sizes
        );
        ensure!(
            self.sample_sizes.first().is_none_or(|&n| n >= 2),
            "sample sizes must be at least 2"
        );
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    /// Some averaged `E_α` was 0, so `log E` is undefined.
    ZeroE,
    /// Fitted slope `m ≥ 1`.
    NonContracting,
}

impl Degeneracy {
    pub fn describe(&self) -> &'static str {
        match self {
            Degeneracy::ZeroE => "zero E_alpha at some sample size",
            Degeneracy::NonContracting => "non-contracting E growth (slope >= 1)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimEstimate {
    pub sample_sizes: Vec<usize>,
    /// Mean `E_α` per entry of `sample_sizes`.
    pub e_values: Vec<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub dimension: Option<f64>,
    pub degenerate: Option<Degeneracy>,
    pub config: EstimatorConfig,
}

impl DimEstimate {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate.is_some()
    }
}

/// Fits the power law to `(n, Ē)` pairs and converts the slope to a dimension.
pub fn fit_power_law(sizes: &[usize], e_values: &[f64], cfg: &EstimatorConfig) -> Result<DimEstimate> {
    ensure!(sizes.len() == e_values.len(), "{} sizes but {} E values", sizes.len(), e_values.len());
    ensure!(sizes.len() >= 3, "need at least 3 sample sizes for the regression, got {}", sizes.len());
    ensure!(cfg.alpha > 0.0, "alpha must be positive");

    let mut est = DimEstimate {
        sample_sizes: sizes.to_vec(),
        e_values: e_values.to_vec(),
        slope: None,
        intercept: None,
        r_squared: None,
        dimension: None,
        degenerate: None,
        config: cfg.clone(),
    };
    if e_values.iter().any(|&e| !(e > 0.0)) {
        est.degenerate = Some(Degeneracy::ZeroE);
        return Ok(est);
    }

    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = e_values.iter().map(|e| e.ln()).collect();
    let count = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / count;
    let my = ys.iter().sum::<f64>() / count;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    ensure!(sxx > 0.0, "sample sizes must not all be equal");
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };

    est.slope = Some(slope);
    est.intercept = Some(intercept);
    est.r_squared = Some(r_squared);
    if slope >= 1.0 {
        est.degenerate = Some(Degeneracy::NonContracting);
    } else {
        est.dimension = Some(cfg.alpha / (1.0 - slope));
    }
    Ok(est)
}

/// Estimates the PH⁰ dimension of the points behind `oracle`.
pub fn estimate_ph_dim(oracle: &DistanceOracle<'_>, cfg: &EstimatorConfig) -> Result<DimEstimate> {
    if oracle.kind() != cfg.metric {
        return Err(Error::InvalidArgument(format!(
            "config asks for the {} metric but the oracle is {}",
            cfg.metric,
            oracle.kind()
        )));
    }
    estimate_with_metric(oracle, cfg)
}

/// Same as [`estimate_ph_dim`] over any [`PointMetric`]; `cfg.metric` is
/// only echoed.
pub fn estimate_with_metric<M: PointMetric + ?Sized>(
    metric: &M,
    cfg: &EstimatorConfig,
) -> Result<DimEstimate> {
    cfg.validate()?;
    let k = metric.len();
    let sizes = cfg.clipped_sizes(k);
    ensure!(
        sizes.len() >= 3,
        "only {} of the configured sample sizes fit in {k} points; need at least 3",
        sizes.len()
    );

    let restarts = cfg.restarts_per_size;
    let units: Vec<(usize, usize)> =
        sizes.iter().flat_map(|&n| (0..restarts).map(move |r| (n, r))).collect();
    let per_unit = units
        .par_iter()
        .map(|&(n, r)| {
            let draw_seed = seed::derive(cfg.seed, &[n as u64, r as u64]);
            let indices = subsample_indices(k, n, draw_seed)?;
            let tree = mst(metric, &indices)?;
            e_alpha(&tree.barcode(), cfg.alpha)
        })
        .collect::<Result<Vec<f64>>>()?;

    let e_values: Vec<f64> = per_unit
        .chunks_exact(restarts)
        .map(|chunk| chunk.iter().sum::<f64>() / restarts as f64)
        .collect();

    let mut echo = cfg.clone();
    echo.sample_sizes = sizes.clone();
    fit_power_law(&sizes, &e_values, &echo)
}

/// `1 - α / dim`, the exponent paired with the fitted slope.
pub fn beta_diagnostic(est: &DimEstimate) -> Result<f64> {
    match est.dimension {
        Some(dim) if !est.is_degenerate() => Ok(1.0 - est.config.alpha / dim),
        _ => Err(Error::InvalidState("beta is undefined for a degenerate estimate".into())),
    }
}
