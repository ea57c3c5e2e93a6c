//! Trajectories, loss matrices and the two distance oracles over them.

use rand::seq::index;

use crate::error::{ensure, Error, Result};
use crate::seed;

/// Largest point count for which [`DistanceOracle::precompute`] will build a
/// full `k × k` matrix.
pub const MAX_PRECOMPUTED: usize = 4096;

fn check_shape(rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    let expected = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::InvalidArgument(format!("shape {rows}×{cols} overflows")))?;
    if values.len() != expected {
        return Err(Error::Data(format!(
            "expected {rows}×{cols} = {expected} values, got {}",
            values.len()
        )));
    }
    Ok(())
}

/// Captured weight iterates, one flattened weight vector per row.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTrajectory {
    iterates: usize,
    param_dim: usize,
    values: Vec<f64>,
}

impl WeightTrajectory {
    pub fn new(iterates: usize, param_dim: usize, values: Vec<f64>) -> Result<Self> {
        ensure!(iterates >= 2, "a trajectory needs at least 2 iterates, got {iterates}");
        ensure!(param_dim >= 1, "parameter dimension must be at least 1");
        check_shape(iterates, param_dim, &values)?;
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite weight at iterate {}, parameter {}",
                pos / param_dim,
                pos % param_dim
            )));
        }
        Ok(Self { iterates, param_dim, values })
    }

    /// Builds a trajectory from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let param_dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * param_dim);
        for (t, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != param_dim {
                return Err(Error::Data(format!(
                    "row {t} has {} entries, expected {param_dim}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), param_dim, values)
    }

    pub fn iterates(&self) -> usize {
        self.iterates
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.param_dim..(t + 1) * self.param_dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.param_dim)
    }
}

/// Per-iterate, per-sample loss values `ℓ(w_t, z_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    iterates: usize,
    samples: usize,
    values: Vec<f64>,
}

impl LossMatrix {
    pub fn new(iterates: usize, samples: usize, values: Vec<f64>) -> Result<Self> {
        ensure!(iterates >= 1, "a loss matrix needs at least one iterate");
        ensure!(samples >= 1, "a loss matrix needs at least one sample");
        check_shape(iterates, samples, &values)?;
        if let Some(pos) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Data(format!(
                "loss at iterate {}, sample {} is {} (must be finite and >= 0)",
                pos / samples,
                pos % samples,
                values[pos]
            )));
        }
        Ok(Self { iterates, samples, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let samples = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * samples);
        for (t, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != samples {
                return Err(Error::Data(format!(
                    "row {t} has {} entries, expected {samples}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), samples, values)
    }

    pub fn iterates(&self) -> usize {
        self.iterates
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.samples..(t + 1) * self.samples]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Euclidean,
    LossBased,
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::LossBased => "loss_based",
        })
    }
}

/// A finite (pseudo)metric space addressed by point index.
///
/// Implementations must be symmetric, nonnegative, zero on the diagonal and
/// deterministic.
pub trait PointMetric: Sync {
    fn len(&self) -> usize;

    /// Distance between points `i` and `j`. Indices are assumed in range.
    fn dist(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_index(index: usize, len: usize) -> Result<()> {
    if index >= len {
        return Err(Error::OutOfBounds { index, len });
    }
    Ok(())
}

/// ℓ² distance between rows `i` and `j`.
pub fn euclidean_dist(traj: &WeightTrajectory, i: usize, j: usize) -> Result<f64> {
    check_index(i, traj.iterates)?;
    check_index(j, traj.iterates)?;
    Ok(euclidean_rows(traj.row(i), traj.row(j)))
}

/// Mean absolute difference of per-sample losses between iterates `i` and `j`.
pub fn loss_pseudo_dist(lm: &LossMatrix, i: usize, j: usize) -> Result<f64> {
    check_index(i, lm.iterates)?;
    check_index(j, lm.iterates)?;
    Ok(loss_rows(lm.row(i), lm.row(j)))
}

#[inline]
fn euclidean_rows(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[inline]
fn loss_rows(a: &[f64], b: &[f64]) -> f64 {
    let total: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    total / a.len() as f64
}

/// Uniform sample of `n` distinct indices from `0..k`, sorted ascending.
pub fn subsample_indices(k: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    ensure!(n >= 1, "sample size must be at least 1");
    ensure!(n <= k, "cannot draw {n} distinct indices from {k}");
    if n == k {
        return Ok((0..k).collect());
    }
    let mut rng = seed::rng(seed);
    let mut out = index::sample(&mut rng, k, n).into_vec();
    out.sort_unstable();
    Ok(out)
}

/// Dense symmetric distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps a row-major `n × n` matrix without checking symmetry.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        check_shape(n, n, &values)?;
        Ok(Self { n, values })
    }

    pub fn from_metric<M: PointMetric + ?Sized>(metric: &M) -> Self {
        let n = metric.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = metric.dist(i, j);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Self { n, values }
    }

    /// Pairwise distances of explicit points under the Euclidean metric.
    pub fn euclidean<R: AsRef<[f64]>>(points: &[R]) -> Self {
        let n = points.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = euclidean_rows(points[i].as_ref(), points[j].as_ref());
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Self { n, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, values: self.values.iter().map(|v| v * c).collect() }
    }
}

impl PointMetric for DistanceMatrix {
    fn len(&self) -> usize {
        self.n
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

#[derive(Debug, Clone, Copy)]
enum Source<'a> {
    Euclidean(&'a WeightTrajectory),
    Loss(&'a LossMatrix),
}

/// Distance oracle over the iterates of a trajectory.
///
/// Distances are computed on the fly by default; [`precompute`](Self::precompute)
/// materializes the full matrix for up to [`MAX_PRECOMPUTED`] points.
#[derive(Debug, Clone)]
pub struct DistanceOracle<'a> {
    source: Source<'a>,
    cache: Option<DistanceMatrix>,
}

impl<'a> DistanceOracle<'a> {
    pub fn euclidean(traj: &'a WeightTrajectory) -> Self {
        Self { source: Source::Euclidean(traj), cache: None }
    }

    pub fn loss_based(lm: &'a LossMatrix) -> Self {
        Self { source: Source::Loss(lm), cache: None }
    }

    /// Builds the oracle for `kind`, requiring a loss matrix whose iterate
    /// count matches the trajectory for [`MetricKind::LossBased`].
    pub fn for_kind(
        kind: MetricKind,
        traj: &'a WeightTrajectory,
        losses: Option<&'a LossMatrix>,
    ) -> Result<Self> {
        match kind {
            MetricKind::Euclidean => Ok(Self::euclidean(traj)),
            MetricKind::LossBased => {
                let lm = losses.ok_or_else(|| {
                    Error::InvalidArgument("loss-based metric requires a loss matrix".into())
                })?;
                if lm.iterates() != traj.iterates() {
                    return Err(Error::InvalidArgument(format!(
                        "loss matrix has {} iterates, trajectory has {}",
                        lm.iterates(),
                        traj.iterates()
                    )));
                }
                Ok(Self::loss_based(lm))
            }
        }
    }

    pub fn kind(&self) -> MetricKind {
        match self.source {
            Source::Euclidean(_) => MetricKind::Euclidean,
            Source::Loss(_) => MetricKind::LossBased,
        }
    }

    pub fn is_precomputed(&self) -> bool {
        self.cache.is_some()
    }

    /// Switches to precomputed-matrix mode.
    pub fn precompute(mut self) -> Result<Self> {
        let n = self.len();
        ensure!(
            n <= MAX_PRECOMPUTED,
            "precomputed mode supports at most {MAX_PRECOMPUTED} points, got {n}"
        );
        let matrix = {
            let on_the_fly = Self { source: self.source, cache: None };
            DistanceMatrix::from_metric(&on_the_fly)
        };
        self.cache = Some(matrix);
        Ok(self)
    }

    /// Bounds-checked distance.
    pub fn checked_dist(&self, i: usize, j: usize) -> Result<f64> {
        check_index(i, self.len())?;
        check_index(j, self.len())?;
        Ok(self.dist(i, j))
    }
}

impl PointMetric for DistanceOracle<'_> {
    fn len(&self) -> usize {
        match self.source {
            Source::Euclidean(t) => t.iterates(),
            Source::Loss(l) => l.iterates(),
        }
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        if let Some(cache) = &self.cache {
            return cache.dist(i, j);
        }
        if i == j {
            return 0.0;
        }
        match self.source {
            Source::Euclidean(t) => euclidean_rows(t.row(i), t.row(j)),
            Source::Loss(l) => loss_rows(l.row(i), l.row(j)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_examples() {
        let traj = WeightTrajectory::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        assert_eq!(euclidean_dist(&traj, 0, 0).unwrap(), 0.0);
        assert_eq!(euclidean_dist(&traj, 0, 1).unwrap(), 5.0);
        assert_eq!(euclidean_dist(&traj, 1, 0).unwrap(), 5.0);
        assert!(matches!(
            euclidean_dist(&traj, 0, 2),
            Err(Error::OutOfBounds { index: 2, len: 2 })
        ));
    }

    #[test]
    fn loss_examples() {
        let lm = LossMatrix::from_rows(&[[0.0, 2.0], [1.0, 4.0], [0.0, 2.0]]).unwrap();
        assert_eq!(loss_pseudo_dist(&lm, 0, 1).unwrap(), 1.5);
        // distinct iterates, identical losses
        assert_eq!(loss_pseudo_dist(&lm, 0, 2).unwrap(), 0.0);
        assert!(loss_pseudo_dist(&lm, 3, 0).is_err());
    }

    #[test]
    fn loss_scaling_is_linear() {
        let lm = LossMatrix::from_rows(&[[0.5, 2.0, 1.0], [1.0, 4.0, 0.25]]).unwrap();
        let scaled =
            LossMatrix::new(2, 3, lm.values().iter().map(|v| v * 4.0).collect()).unwrap();
        let d = loss_pseudo_dist(&lm, 0, 1).unwrap();
        assert_eq!(loss_pseudo_dist(&scaled, 0, 1).unwrap(), 4.0 * d);
    }

    #[test]
    fn constructors_validate() {
        assert!(WeightTrajectory::new(1, 2, vec![0.0, 0.0]).is_err());
        assert!(WeightTrajectory::new(2, 2, vec![0.0; 3]).is_err());
        assert!(WeightTrajectory::new(2, 1, vec![0.0, f64::NAN]).is_err());
        assert!(LossMatrix::new(2, 1, vec![0.0, -1.0]).is_err());
        assert!(LossMatrix::new(2, 1, vec![0.0, f64::INFINITY]).is_err());
        assert!(WeightTrajectory::from_rows(&[vec![0.0, 1.0], vec![1.0]]).is_err());
    }

    #[test]
    fn loss_oracle_requires_matching_matrix() {
        let traj = WeightTrajectory::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let lm = LossMatrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert!(DistanceOracle::for_kind(MetricKind::LossBased, &traj, None).is_err());
        assert!(DistanceOracle::for_kind(MetricKind::LossBased, &traj, Some(&lm)).is_err());
        assert!(DistanceOracle::for_kind(MetricKind::Euclidean, &traj, None).is_ok());
    }

    #[test]
    fn precomputed_matches_on_the_fly() {
        let traj =
            WeightTrajectory::from_rows(&[[0.0, 1.0], [2.0, -1.0], [0.5, 0.5], [3.0, 3.0]])
                .unwrap();
        let fly = DistanceOracle::euclidean(&traj);
        let pre = fly.clone().precompute().unwrap();
        assert!(pre.is_precomputed());
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(fly.dist(i, j).to_bits(), pre.dist(i, j).to_bits());
            }
        }
        assert!(pre.checked_dist(4, 0).is_err());
    }

    #[test]
    fn subsample_contract() {
        assert_eq!(subsample_indices(5, 5, 1).unwrap(), vec![0, 1, 2, 3, 4]);
        let one = subsample_indices(10, 1, 3).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0] < 10);
        assert!(subsample_indices(3, 4, 0).is_err());
        assert!(subsample_indices(3, 0, 0).is_err());

        let a = subsample_indices(10, 3, 42).unwrap();
        let b = subsample_indices(10, 3, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, [1, 6, 9]);
        let mut dedup = a.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 3);
    }
}
