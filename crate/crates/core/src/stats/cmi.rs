//! Plug-in conditional mutual information and the local-permutation
//! conditional-independence test.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::partial::{at_least, MIN_PERMUTATIONS};
use crate::error::{ensure, Error, Result};
use crate::seed;

/// Default number of equal-frequency bins for continuous variables.
pub const DEFAULT_BINS: usize = 5;

const DENSE_LIMIT: usize = 1 << 22;

/// Maps labels to dense codes `0..k` in order of first appearance.
fn encode<T: Eq + Hash + Clone>(labels: &[T]) -> (Vec<u32>, usize) {
    let mut map: HashMap<T, u32> = HashMap::new();
    let codes = labels
        .iter()
        .map(|l| {
            let next = map.len() as u32;
            *map.entry(l.clone()).or_insert(next)
        })
        .collect();
    (codes, map.len())
}

/// Label sequences already encoded as dense codes.
struct Coded {
    x: Vec<u32>,
    y: Vec<u32>,
    z: Vec<u32>,
    nx: usize,
    ny: usize,
    nz: usize,
}

impl Coded {
    fn new<X, Y, Z>(x: &[X], y: &[Y], z: &[Z]) -> Self
    where
        X: Eq + Hash + Clone,
        Y: Eq + Hash + Clone,
        Z: Eq + Hash + Clone,
    {
        let (x, nx) = encode(x);
        let (y, ny) = encode(y);
        let (z, nz) = encode(z);
        Self { x, y, z, nx, ny, nz }
    }

    fn cmi_with_y(&self, y: &[u32]) -> f64 {
        plug_in(&self.x, y, &self.z, self.nx, self.ny, self.nz)
    }
}

/// `Σ p(x,y,z) ln[ p(x,y,z) p(z) / (p(x,z) p(y,z)) ]` from counts.
fn plug_in(x: &[u32], y: &[u32], z: &[u32], nx: usize, ny: usize, nz: usize) -> f64 {
    let n = x.len() as f64;
    let mut c_z = vec![0u32; nz];
    let mut c_xz = vec![0u32; nx * nz];
    let mut c_yz = vec![0u32; ny * nz];
    for i in 0..x.len() {
        let (a, b, c) = (x[i] as usize, y[i] as usize, z[i] as usize);
        c_z[c] += 1;
        c_xz[a * nz + c] += 1;
        c_yz[b * nz + c] += 1;
    }
    let term = |cxyz: u32, a: usize, b: usize, c: usize| -> f64 {
        let cxyz = cxyz as f64;
        let ratio = cxyz * c_z[c] as f64 / (c_xz[a * nz + c] as f64 * c_yz[b * nz + c] as f64);
        cxyz / n * ratio.ln()
    };

    let total = if nx.saturating_mul(ny).saturating_mul(nz) <= DENSE_LIMIT {
        let mut c_xyz = vec![0u32; nx * ny * nz];
        for i in 0..x.len() {
            c_xyz[(x[i] as usize * ny + y[i] as usize) * nz + z[i] as usize] += 1;
        }
        let mut total = 0.0;
        for a in 0..nx {
            for b in 0..ny {
                for c in 0..nz {
                    let cnt = c_xyz[(a * ny + b) * nz + c];
                    if cnt > 0 {
                        total += term(cnt, a, b, c);
                    }
                }
            }
        }
        total
    } else {
        let mut c_xyz: BTreeMap<(u32, u32, u32), u32> = BTreeMap::new();
        for i in 0..x.len() {
            *c_xyz.entry((x[i], y[i], z[i])).or_default() += 1;
        }
        c_xyz
            .iter()
            .map(|(&(a, b, c), &cnt)| term(cnt, a as usize, b as usize, c as usize))
            .sum()
    };
    total.max(0.0)
}

/// Plug-in CMI `I(X; Y | Z)` in nats of three discrete label sequences.
pub fn cmi_discrete<X, Y, Z>(x: &[X], y: &[Y], z: &[Z]) -> Result<f64>
where
    X: Eq + Hash + Clone,
    Y: Eq + Hash + Clone,
    Z: Eq + Hash + Clone,
{
    ensure!(
        x.len() == y.len() && y.len() == z.len(),
        "length mismatch: {}, {}, {}",
        x.len(),
        y.len(),
        z.len()
    );
    ensure!(!x.is_empty(), "CMI needs at least one observation");
    let coded = Coded::new(x, y, z);
    Ok(coded.cmi_with_y(&coded.y))
}

/// Equal-frequency discretization into `bins` bins.
///
/// Points are ordered by value and the `p`-th point goes to bin
/// `p · bins / n`; tied values all take the bin of the first of them.
pub fn equal_frequency_bins(values: &[f64], bins: usize) -> Result<Vec<u32>> {
    ensure!(bins >= 2, "need at least 2 bins, got {bins}");
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite observation".into()));
    }
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0u32; n];
    let mut current = 0u32;
    for (p, &i) in order.iter().enumerate() {
        if p == 0 || values[i] != values[order[p - 1]] {
            current = (p * bins / n) as u32;
        }
        out[i] = current;
    }
    Ok(out)
}

/// Exact-level key for a discrete conditioning value; `-0.0` and `0.0` agree.
fn level_key(v: f64) -> u64 {
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmiTest {
    pub cmi: f64,
    pub p_value: f64,
    pub permutations: usize,
    pub bins: usize,
    /// Strata of `z` with a single member; they are never permuted.
    pub small_strata: usize,
}

/// Conditional-independence test of `x ⟂ y | z` by local permutations.
///
/// `x` and `y` are discretized into `bins` equal-frequency bins, `z` is kept
/// at its exact levels. Each of the `permutations` rounds shuffles the
/// y-labels within every z-stratum and recomputes the plug-in CMI;
/// `p = (1 + #{CMI_perm ≥ CMI_obs}) / (1 + B)`.
pub fn cmi_local_perm_test(
    x: &[f64],
    y: &[f64],
    z: &[f64],
    bins: usize,
    permutations: usize,
    seed: u64,
) -> Result<CmiTest> {
    ensure!(bins >= 2, "need at least 2 bins, got {bins}");
    ensure!(permutations >= MIN_PERMUTATIONS, "need at least {MIN_PERMUTATIONS} permutations, got {permutations}");
    ensure!(
        x.len() == y.len() && y.len() == z.len(),
        "length mismatch: {}, {}, {}",
        x.len(),
        y.len(),
        z.len()
    );
    ensure!(!x.is_empty(), "CMI needs at least one observation");
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite conditioning value".into()));
    }

    let bx = equal_frequency_bins(x, bins)?;
    let by = equal_frequency_bins(y, bins)?;
    let bz: Vec<u64> = z.iter().map(|&v| level_key(v)).collect();
    let coded = Coded::new(&bx, &by, &bz);

    let mut strata: Vec<Vec<usize>> = vec![Vec::new(); coded.nz];
    for (i, &c) in coded.z.iter().enumerate() {
        strata[c as usize].push(i);
    }
    let small_strata = strata.iter().filter(|s| s.len() < 2).count();

    let observed = coded.cmi_with_y(&coded.y);
    let exceed = (0..permutations)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed::derived_rng(seed, &[b as u64]);
            let mut y_perm = coded.y.clone();
            let mut buf = Vec::new();
            for members in strata.iter().filter(|s| s.len() >= 2) {
                buf.clear();
                buf.extend(members.iter().map(|&i| coded.y[i]));
                buf.shuffle(&mut rng);
                for (&i, &label) in members.iter().zip(&buf) {
                    y_perm[i] = label;
                }
            }
            usize::from(at_least(coded.cmi_with_y(&y_perm), observed))
        })
        .sum::<usize>();

    Ok(CmiTest {
        cmi: observed,
        p_value: (1 + exceed) as f64 / (1 + permutations) as f64,
        permutations,
        bins,
        small_strata,
    })
}
