//! 0-dimensional persistent homology of finite (pseudo)metric spaces.
//!
//! The finite bars of the Vietoris–Rips PH⁰ barcode are exactly the edge
//! lengths of a minimum spanning tree, so [`mst`] is the production path and
//! [`vr_ph0_bruteforce`] is the union-find reference used to check it.

use crate::error::{ensure, Error, Result};
use crate::metricspace::{DistanceMatrix, PointMetric};

/// Largest input accepted by [`vr_ph0_bruteforce`].
pub const BRUTEFORCE_MAX_POINTS: usize = 512;

/// Finite PH⁰ bars (all born at 0), sorted ascending. The infinite bar of
/// the surviving component is not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Barcode0 {
    bar_lengths: Vec<f64>,
    point_count: usize,
}

impl Barcode0 {
    /// Builds a barcode from `point_count - 1` nonnegative bar lengths.
    pub fn new(mut bar_lengths: Vec<f64>, point_count: usize) -> Result<Self> {
        ensure!(point_count >= 1, "a barcode needs at least one point");
        ensure!(
            bar_lengths.len() == point_count - 1,
            "{} bars for {point_count} points (expected {})",
            bar_lengths.len(),
            point_count - 1
        );
        if let Some(bad) = bar_lengths.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::Data(format!("invalid bar length {bad}")));
        }
        bar_lengths.sort_by(f64::total_cmp);
        Ok(Self { bar_lengths, point_count })
    }

    pub fn bar_lengths(&self) -> &[f64] {
        &self.bar_lengths
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }
}

impl From<&MstResult> for Barcode0 {
    fn from(mst: &MstResult) -> Self {
        let mut bar_lengths = mst.edge_lengths.clone();
        bar_lengths.sort_by(f64::total_cmp);
        Self { bar_lengths, point_count: mst.edge_lengths.len() + 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MstResult {
    /// Edge lengths in the order Prim added them.
    pub edge_lengths: Vec<f64>,
    pub total_weight: f64,
    /// `(from, to)` pairs in the caller's index space, aligned with `edge_lengths`.
    pub parent_edges: Vec<(usize, usize)>,
}

impl MstResult {
    pub fn barcode(&self) -> Barcode0 {
        Barcode0::from(self)
    }
}

/// Minimum spanning tree of the complete graph on `indices` by dense Prim.
///
/// Uses `O(n²)` distance evaluations and `O(n)` memory. Among equal-weight
/// candidates the lowest position in `indices` is attached first.
pub fn mst<M: PointMetric + ?Sized>(metric: &M, indices: &[usize]) -> Result<MstResult> {
    let n = indices.len();
    ensure!(n >= 2, "an MST needs at least 2 points, got {n}");
    let len = metric.len();
    if let Some(&bad) = indices.iter().find(|&&i| i >= len) {
        return Err(Error::OutOfBounds { index: bad, len });
    }

    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edge_lengths = Vec::with_capacity(n - 1);
    let mut parent_edges = Vec::with_capacity(n - 1);

    in_tree[0] = true;
    let mut current = 0usize;
    for _ in 1..n {
        let from = indices[current];
        let mut next = usize::MAX;
        let mut next_dist = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = metric.dist(from, indices[j]);
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::NonFiniteDistance { i: from, j: indices[j] });
            }
            if d < best[j] {
                best[j] = d;
                parent[j] = current;
            }
            if next == usize::MAX || best[j] < next_dist {
                next = j;
                next_dist = best[j];
            }
        }
        in_tree[next] = true;
        edge_lengths.push(next_dist);
        parent_edges.push((indices[parent[next]], indices[next]));
        current = next;
    }

    let total_weight = edge_lengths.iter().sum();
    Ok(MstResult { edge_lengths, total_weight, parent_edges })
}

/// `E_α = Σ length^α` over the finite bars.
pub fn e_alpha(bars: &Barcode0, alpha: f64) -> Result<f64> {
    ensure!(alpha > 0.0 && alpha.is_finite(), "alpha must be positive and finite, got {alpha}");
    Ok(bars.bar_lengths.iter().map(|l| l.powf(alpha)).sum())
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when `a` and `b` were in different components.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// PH⁰ of the Vietoris–Rips filtration of a full distance matrix.
///
/// Edges enter in ascending order of length; every merge of two components
/// at scale `t` closes a bar `[0, t)`.
pub fn vr_ph0_bruteforce(dm: &DistanceMatrix) -> Result<Barcode0> {
    let n = dm.len();
    ensure!(n >= 1, "empty distance matrix");
    ensure!(
        n <= BRUTEFORCE_MAX_POINTS,
        "brute-force PH0 is limited to {BRUTEFORCE_MAX_POINTS} points, got {n}"
    );
    for i in 0..n {
        if dm.get(i, i) != 0.0 {
            return Err(Error::Data(format!("nonzero diagonal entry at {i}")));
        }
        for j in (i + 1)..n {
            let (a, b) = (dm.get(i, j), dm.get(j, i));
            if a != b {
                return Err(Error::Data(format!("asymmetric entries at ({i}, {j}): {a} vs {b}")));
            }
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::NonFiniteDistance { i, j });
            }
        }
    }

    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((dm.get(i, j), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut uf = UnionFind::new(n);
    let mut bars = Vec::with_capacity(n - 1);
    for (t, i, j) in edges {
        if uf.union(i, j) {
            bars.push(t);
            if bars.len() == n - 1 {
                break;
            }
        }
    }
    Barcode0::new(bars, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64]) -> DistanceMatrix {
        let rows: Vec<[f64; 1]> = points.iter().map(|&p| [p]).collect();
        DistanceMatrix::euclidean(&rows)
    }

    #[test]
    fn collinear_three_points() {
        let dm = line(&[0.0, 1.0, 3.0]);
        let tree = mst(&dm, &[0, 1, 2]).unwrap();
        assert_eq!(tree.barcode().bar_lengths(), &[1.0, 2.0]);
        assert_eq!(tree.total_weight, 3.0);
        assert_eq!(tree.parent_edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn two_points() {
        let dm = line(&[0.0, 2.5]);
        let tree = mst(&dm, &[0, 1]).unwrap();
        assert_eq!(tree.edge_lengths, vec![2.5]);
        assert_eq!(vr_ph0_bruteforce(&dm).unwrap().bar_lengths(), &[2.5]);
    }

    #[test]
    fn identical_points() {
        let dm = line(&[4.0; 6]);
        let tree = mst(&dm, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(tree.edge_lengths, vec![0.0; 5]);
        assert_eq!(tree.total_weight, 0.0);
        assert_eq!(e_alpha(&tree.barcode(), 1.0).unwrap(), 0.0);
        assert_eq!(e_alpha(&tree.barcode(), 0.5).unwrap(), 0.0);
    }

    #[test]
    fn mst_on_index_subset() {
        let dm = line(&[0.0, 10.0, 1.0, 3.0]);
        let tree = mst(&dm, &[0, 2, 3]).unwrap();
        assert_eq!(tree.barcode().bar_lengths(), &[1.0, 2.0]);
        assert_eq!(tree.parent_edges, vec![(0, 2), (2, 3)]);
    }

    #[test]
    fn mst_errors() {
        let dm = line(&[0.0, 1.0]);
        assert!(matches!(mst(&dm, &[0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(mst(&dm, &[0, 5]), Err(Error::OutOfBounds { index: 5, .. })));
        let nan = DistanceMatrix::from_values(2, vec![0.0, f64::NAN, f64::NAN, 0.0]).unwrap();
        assert!(matches!(mst(&nan, &[0, 1]), Err(Error::NonFiniteDistance { i: 0, j: 1 })));
    }

    #[test]
    fn unit_square_union_find() {
        let dm = DistanceMatrix::euclidean(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(vr_ph0_bruteforce(&dm).unwrap().bar_lengths(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn bruteforce_rejects_bad_matrices() {
        let asym = DistanceMatrix::from_values(2, vec![0.0, 1.0, 2.0, 0.0]).unwrap();
        assert!(matches!(vr_ph0_bruteforce(&asym), Err(Error::Data(_))));
        let diag = DistanceMatrix::from_values(2, vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(vr_ph0_bruteforce(&diag), Err(Error::Data(_))));
    }

    #[test]
    fn e_alpha_examples() {
        let bars = Barcode0::new(vec![2.0, 1.0], 3).unwrap();
        assert_eq!(bars.bar_lengths(), &[1.0, 2.0]);
        assert_eq!(e_alpha(&bars, 1.0).unwrap(), 3.0);
        assert_eq!(e_alpha(&bars, 2.0).unwrap(), 5.0);
        assert!(e_alpha(&bars, 0.0).is_err());
        assert!(e_alpha(&bars, -1.0).is_err());
        assert!(e_alpha(&bars, f64::NAN).is_err());
    }

    #[test]
    fn barcode_validates() {
        assert!(Barcode0::new(vec![1.0], 3).is_err());
        assert!(Barcode0::new(vec![-1.0], 2).is_err());
        assert!(Barcode0::new(vec![], 1).is_ok());
    }
}
