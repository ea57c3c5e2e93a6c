#![allow(dead_code)]

use std::collections::HashMap;

use phdim_core::seed;
use phdim_core::stats::records::RunRecord;
use rand::Rng;

pub fn uniform_cube(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seed::rng(seed);
    (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect()
}

/// Chaos-game samples of the Sierpinski triangle, after a short burn-in.
pub fn sierpinski(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let corners = [[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]];
    let mut rng = seed::rng(seed);
    let mut p = [rng.random::<f64>(), rng.random::<f64>()];
    let mut out = Vec::with_capacity(n);
    for step in 0..n + 20 {
        let c = corners[rng.random_range(0..3)];
        p = [(p[0] + c[0]) / 2.0, (p[1] + c[1]) / 2.0];
        if step >= 20 {
            out.push(p.to_vec());
        }
    }
    out
}

pub fn random_points(n: usize, dim: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

/// Minimum spanning-tree weight over every labelled tree, via Prüfer codes.
/// Each tree's weight is summed over its edge lengths in ascending order.
pub fn exhaustive_mst_weight(dist: &[Vec<f64>]) -> f64 {
    let n = dist.len();
    let len = n - 2;
    let mut code = vec![0usize; len];
    let mut best = f64::INFINITY;
    loop {
        best = best.min(prufer_weight(&code, dist));
        let mut i = 0;
        while i < len {
            code[i] += 1;
            if code[i] < n {
                break;
            }
            code[i] = 0;
            i += 1;
        }
        if i == len {
            return best;
        }
    }
}

fn prufer_weight(code: &[usize], dist: &[Vec<f64>]) -> f64 {
    let n = dist.len();
    let mut degree = vec![1usize; n];
    for &c in code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &c in code {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push(dist[leaf][c]);
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push(dist[rest[0]][rest[1]]);
    sorted_sum(edges)
}

pub fn sorted_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

fn sign(v: f64) -> i64 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// τ-b by counting every pair.
pub fn kendall_bruteforce(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut s, mut tx, mut ty) = (0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (sign(x[i] - x[j]), sign(y[i] - y[j]));
            s += a * b;
            tx += (a != 0) as i64;
            ty += (b != 0) as i64;
        }
    }
    (tx > 0 && ty > 0).then(|| s as f64 / (tx as f64 * ty as f64).sqrt())
}

/// Rank of each value as `1 + #smaller + (#equal - 1) / 2`.
pub fn ranks_bruteforce(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let less = v.iter().filter(|b| *b < a).count() as f64;
            let equal = v.iter().filter(|b| *b == a).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn spearman_bruteforce(x: &[f64], y: &[f64]) -> Option<f64> {
    let (rx, ry) = (ranks_bruteforce(x), ranks_bruteforce(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Plug-in CMI in nats by explicit enumeration of every `(x, y, z)` cell.
pub fn cmi_triple_loop(x: &[u32], y: &[u32], z: &[u32]) -> f64 {
    let n = x.len() as f64;
    let max = |v: &[u32]| *v.iter().max().unwrap() + 1;
    let (kx, ky, kz) = (max(x), max(y), max(z));
    let mut total = 0.0;
    for a in 0..kx {
        for b in 0..ky {
            for c in 0..kz {
                let mut nxyz = 0.0;
                let mut nxz = 0.0;
                let mut nyz = 0.0;
                let mut nz = 0.0;
                for i in 0..x.len() {
                    if z[i] != c {
                        continue;
                    }
                    nz += 1.0;
                    let (ix, iy) = (x[i] == a, y[i] == b);
                    nxz += ix as u8 as f64;
                    nyz += iy as u8 as f64;
                    nxyz += (ix && iy) as u8 as f64;
                }
                if nxyz > 0.0 {
                    total += nxyz / n * (nxyz * nz / (nxz * nyz)).ln();
                }
            }
        }
    }
    total
}

/// Two-axis table (2 learning rates × 4 batch sizes) whose per-cell τ values
/// are {1, 1, -1, 1} along the learning-rate axis and {1, 1} along the
/// batch-size axis, so Ψ = (0.5 + 1) / 2.
pub fn psi_fixture() -> Vec<RunRecord> {
    let lrs = [0.01, 0.1];
    let batches = [16u64, 32, 64, 128];
    let shift = [0.3, 0.3, -0.3, 0.3];
    let mut out = Vec::new();
    for (li, &lr) in lrs.iter().enumerate() {
        for (bi, &bs) in batches.iter().enumerate() {
            out.push(RunRecord {
                run_id: format!("lr{li}-b{bi}"),
                learning_rate: Some(lr),
                batch_size: Some(bs),
                seed: Some(0),
                dim_euclidean: Some(bi as f64 + shift[bi] * li as f64),
                gap_accuracy: Some(bi as f64 + 10.0 * li as f64),
                ..Default::default()
            });
        }
    }
    out
}

/// One-sample Kolmogorov–Smirnov statistic against Uniform(0, 1).
pub fn ks_uniform(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| ((i as f64 + 1.0) / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at level 0.01.
pub fn ks_critical_001(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}

pub fn count_by<K: std::hash::Hash + Eq>(items: impl IntoIterator<Item = K>) -> HashMap<K, usize> {
    let mut m = HashMap::new();
    for k in items {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}
