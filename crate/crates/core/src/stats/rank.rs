//! Rank correlations: Spearman's ρ and Kendall's τ-b.

use crate::error::{ensure, Error, Result};

fn check_pair(x: &[f64], y: &[f64], min_len: usize) -> Result<()> {
    ensure!(x.len() == y.len(), "length mismatch: {} vs {}", x.len(), y.len());
    ensure!(x.len() >= min_len, "need at least {min_len} observations, got {}", x.len());
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite observation".into()));
    }
    Ok(())
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end) as f64 / 2.0 + 1.0;
        for &i in &order[start..=end] {
            ranks[i] = rank;
        }
        start = end + 1;
    }
    ranks
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("constant input has no correlation".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's ρ: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 3)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Number of tied pairs `Σ t(t-1)/2` over runs of equal values in a slice
/// that is already grouped (equal values adjacent).
fn tied_pairs_in_runs<T: PartialEq>(sorted: &[T]) -> i64 {
    let mut total = 0i64;
    let mut run = 1i64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` ascending and returns the number of inversions removed.
fn merge_sort_count(v: &mut [f64], buf: &mut Vec<f64>) -> i64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_sort_count(&mut v[..mid], buf) + merge_sort_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf.push(v[j]);
            swaps += (mid - i) as i64;
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Kendall's τ-b with tie corrections in both margins, in `O(n log n)`.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    let n = x.len() as i64;
    let n0 = n * (n - 1) / 2;

    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let xy: Vec<(f64, f64)> = order.iter().map(|&i| (x[i], y[i])).collect();
    let ties_x = tied_pairs_in_runs(&xs);
    let ties_xy = tied_pairs_in_runs(&xy);

    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let mut buf = Vec::with_capacity(ys.len());
    let swaps = merge_sort_count(&mut ys, &mut buf);
    let ties_y = tied_pairs_in_runs(&ys);

    let concordant_minus_discordant = n0 - ties_x - ties_y + ties_xy - 2 * swaps;
    let (dx, dy) = (n0 - ties_x, n0 - ties_y);
    if dx == 0 || dy == 0 {
        return Err(Error::Degenerate("all values tied in one margin".into()));
    }
    Ok(concordant_minus_discordant as f64 / (dx as f64 * dy as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&x, &x).unwrap(), 1.0);
        assert_eq!(spearman(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!((spearman(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::Degenerate(_))));
        assert!(spearman(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn kendall_examples() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(kendall_tau_b(&x, &x).unwrap(), 1.0);
        assert!((kendall_tau_b(&x, &[1.0, 3.0, 2.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(kendall_tau_b(&[2.0, 2.0, 2.0], &x), Err(Error::Degenerate(_))));
        assert!(kendall_tau_b(&x, &[f64::NAN, 1.0, 2.0]).is_err());
    }

    #[test]
    fn kendall_with_ties() {
        // Hand count: pairs (0,1) tie in x, (2,3) tie in y; remaining 4 pairs
        // all concordant. τ-b = 4 / sqrt(5 · 5).
        let x = [1.0, 1.0, 2.0, 3.0];
        let y = [1.0, 2.0, 3.0, 3.0];
        assert!((kendall_tau_b(&x, &y).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }
}
