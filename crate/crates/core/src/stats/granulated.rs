//! Granulated Kendall coefficient Ψ.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rank::kendall_tau_b;
use super::records::RunRecord;
use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisScore {
    pub axis: String,
    /// Mean τ-b over the usable cells of this axis.
    pub mean: f64,
    pub cells_used: usize,
    /// Cells with fewer than two levels or an all-tied margin.
    pub cells_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranulatedKendall {
    pub psi: f64,
    pub axes: Vec<AxisScore>,
}

#[derive(Default)]
struct Accum {
    measure: f64,
    target: f64,
    count: usize,
}

/// Ψ: for each axis, τ-b between `measure` and `target` within every cell
/// that fixes all other axes, averaged over cells and then over axes.
///
/// Records sharing every axis value (e.g. different seeds) are averaged into
/// a single point before τ is computed. Records missing the measure, the
/// target or any axis value are ignored.
pub fn granulated_kendall(
    records: &[RunRecord],
    measure: &str,
    target: &str,
    axes: &[&str],
) -> Result<GranulatedKendall> {
    ensure!(!axes.is_empty(), "granulated Kendall needs at least one hyperparameter axis");

    struct Point {
        levels: Vec<String>,
        measure: f64,
        target: f64,
    }
    let points: Vec<Point> = records
        .iter()
        .filter_map(|r| {
            let levels = axes.iter().map(|a| r.level(a)).collect::<Option<Vec<_>>>()?;
            Some(Point { levels, measure: r.numeric(measure)?, target: r.numeric(target)? })
        })
        .collect();

    let mut scores = Vec::with_capacity(axes.len());
    for (a, axis) in axes.iter().enumerate() {
        let distinct: std::collections::BTreeSet<&str> =
            points.iter().map(|p| p.levels[a].as_str()).collect();
        ensure!(distinct.len() >= 2, "axis {axis} has fewer than 2 distinct values");

        let mut cells: BTreeMap<Vec<&str>, BTreeMap<&str, Accum>> = BTreeMap::new();
        for p in &points {
            let key: Vec<&str> = p
                .levels
                .iter()
                .enumerate()
                .filter(|(b, _)| *b != a)
                .map(|(_, l)| l.as_str())
                .collect();
            let acc = cells.entry(key).or_default().entry(p.levels[a].as_str()).or_default();
            acc.measure += p.measure;
            acc.target += p.target;
            acc.count += 1;
        }

        let mut taus = Vec::new();
        let mut skipped = 0;
        for by_level in cells.values() {
            if by_level.len() < 2 {
                skipped += 1;
                continue;
            }
            let (m, t): (Vec<f64>, Vec<f64>) = by_level
                .values()
                .map(|acc| (acc.measure / acc.count as f64, acc.target / acc.count as f64))
                .unzip();
            match kendall_tau_b(&m, &t) {
                Ok(tau) => taus.push(tau),
                Err(Error::Degenerate(_)) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        if taus.is_empty() {
            return Err(Error::InvalidArgument(format!("no valid cell on axis {axis}")));
        }
        scores.push(AxisScore {
            axis: axis.to_string(),
            mean: taus.iter().sum::<f64>() / taus.len() as f64,
            cells_used: taus.len(),
            cells_skipped: skipped,
        });
    }

    let psi = scores.iter().map(|s| s.mean).sum::<f64>() / scores.len() as f64;
    Ok(GranulatedKendall { psi, axes: scores })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: usize, lr: f64, bs: u64, seed: u64, m: f64, g: f64) -> RunRecord {
        RunRecord {
            run_id: format!("r{id}"),
            learning_rate: Some(lr),
            batch_size: Some(bs),
            seed: Some(seed),
            dim_euclidean: Some(m),
            gap_loss: Some(g),
            ..Default::default()
        }
    }

    #[test]
    fn single_axis_single_cell_is_plain_kendall() {
        let m = [0.3, 0.1, 0.7, 0.5];
        let g = [1.0, 2.0, 4.0, 3.0];
        let records: Vec<_> =
            (0..4).map(|i| rec(i, 0.01 * (i + 1) as f64, 32, 0, m[i], g[i])).collect();
        let psi = granulated_kendall(&records, "dim_euclidean", "gap_loss", &["learning_rate"]).unwrap();
        assert_eq!(psi.psi, kendall_tau_b(&m, &g).unwrap());
        assert_eq!(psi.axes[0].cells_used, 1);
    }

    #[test]
    fn seeds_are_averaged_within_cells() {
        // Two seeds per lr; per-seed orderings disagree but the means agree.
        let records = vec![
            rec(0, 0.1, 32, 0, 1.0, 1.0),
            rec(1, 0.1, 32, 1, 3.0, 1.0),
            rec(2, 0.2, 32, 0, 2.5, 2.0),
            rec(3, 0.2, 32, 1, 2.5, 2.0),
        ];
        let psi = granulated_kendall(&records, "dim_euclidean", "gap_loss", &["learning_rate"]).unwrap();
        assert_eq!(psi.psi, 1.0);
    }

    #[test]
    fn errors() {
        let records = vec![rec(0, 0.1, 32, 0, 1.0, 1.0), rec(1, 0.1, 64, 0, 2.0, 2.0)];
        assert!(granulated_kendall(&records, "dim_euclidean", "gap_loss", &["learning_rate"]).is_err());
        assert!(granulated_kendall(&records, "dim_euclidean", "gap_loss", &[]).is_err());
        // Both cells on the lr axis are single-level.
        let records = vec![rec(0, 0.1, 32, 0, 1.0, 1.0), rec(1, 0.2, 64, 0, 2.0, 2.0)];
        let err =
            granulated_kendall(&records, "dim_euclidean", "gap_loss", &["learning_rate", "batch_size"])
                .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(m) if m.contains("learning_rate")));
    }
}
