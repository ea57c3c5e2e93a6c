//! Runs one statistical method over a record table and lays the results out
//! as report rows, optionally one row per group.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::cmi::{cmi_local_perm_test, DEFAULT_BINS};
use super::fisher::fisher_z_compare;
use super::granulated::granulated_kendall;
use super::partial::{partial_corr, CorrelationKind};
use super::rank::{kendall_tau_b, spearman};
use super::records::{RecordTable, RunRecord};
use super::report::{CorrelationReport, Method};
use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeRequest {
    pub method: Method,
    pub measure: String,
    pub target: String,
    /// Second measure for [`Method::FisherZ`].
    pub compare: Option<String>,
    /// Hyperparameter axes for [`Method::Granulated`].
    pub axes: Vec<String>,
    /// Conditioning columns for [`Method::Partial`] and [`Method::Cmi`].
    pub condition: Vec<String>,
    pub group_by: Option<String>,
    /// Coefficients reported by [`Method::Partial`].
    pub kinds: Vec<CorrelationKind>,
    pub permutations: usize,
    pub bins: usize,
    pub seed: u64,
}

impl AnalyzeRequest {
    pub fn new(method: Method, measure: &str, target: &str, seed: u64) -> Self {
        Self {
            method,
            measure: measure.to_owned(),
            target: target.to_owned(),
            compare: None,
            axes: vec!["learning_rate".into(), "batch_size".into()],
            condition: Vec::new(),
            group_by: None,
            kinds: vec![CorrelationKind::Spearman, CorrelationKind::Kendall],
            permutations: 999,
            bins: DEFAULT_BINS,
            seed,
        }
    }

    fn required_columns(&self) -> Vec<&str> {
        let mut cols = vec![self.measure.as_str(), self.target.as_str()];
        cols.extend(self.compare.as_deref());
        cols.extend(self.group_by.as_deref());
        match self.method {
            Method::Granulated => cols.extend(self.axes.iter().map(String::as_str)),
            Method::Partial | Method::Cmi => cols.extend(self.condition.iter().map(String::as_str)),
            _ => {}
        }
        cols
    }

    fn validate(&self) -> Result<()> {
        match self.method {
            Method::FisherZ => ensure!(self.compare.is_some(), "fisher-z needs a second measure to compare"),
            Method::Granulated => ensure!(!self.axes.is_empty(), "granulated Kendall needs at least one axis"),
            Method::Partial => ensure!(!self.kinds.is_empty(), "partial correlation needs a coefficient kind"),
            Method::Cmi => ensure!(
                self.condition.len() == 1,
                "the CMI test conditions on exactly one column, got {}",
                self.condition.len()
            ),
            Method::Spearman | Method::Kendall => {}
        }
        Ok(())
    }
}

/// Group levels in natural order: numerically when both parse, else lexically.
fn level_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        _ => a.cmp(b),
    }
}

fn groups<'a>(records: &'a [RunRecord], by: Option<&str>) -> Vec<(Option<String>, Vec<&'a RunRecord>)> {
    let Some(column) = by else {
        return vec![(None, records.iter().collect())];
    };
    let mut map: BTreeMap<String, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        if let Some(level) = r.level(column) {
            map.entry(level).or_default().push(r);
        }
    }
    let mut out: Vec<_> = map.into_iter().collect();
    out.sort_by(|a, b| level_order(&a.0, &b.0));
    out.into_iter().map(|(level, rs)| (Some(format!("{column}={level}")), rs)).collect()
}

/// Columns of the records that have every requested numeric column.
fn columns(records: &[&RunRecord], names: &[&str]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); names.len()];
    for r in records {
        if let Some(values) = names.iter().map(|c| r.numeric(c)).collect::<Option<Vec<_>>>() {
            for (col, v) in out.iter_mut().zip(values) {
                col.push(v);
            }
        }
    }
    out
}

fn fill(row: &mut CorrelationReport, result: Result<f64>) -> Result<()> {
    match result {
        Ok(v) => row.value = Some(v),
        Err(e @ (Error::Degenerate(_) | Error::InvalidArgument(_) | Error::Data(_))) => {
            row.diagnostic = Some(e.to_string())
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

pub fn analyze(table: &RecordTable, req: &AnalyzeRequest) -> Result<Vec<CorrelationReport>> {
    table.require(&req.required_columns())?;
    req.validate()?;

    let mut rows = Vec::new();
    for (group, records) in groups(&table.records, req.group_by.as_deref()) {
        let base = |count: usize| {
            let mut row = CorrelationReport::new(req.method, &req.measure, &req.target, count);
            row.group = group.clone();
            row
        };
        match req.method {
            Method::Spearman | Method::Kendall => {
                let cols = columns(&records, &[&req.measure, &req.target]);
                let mut row = base(cols[0].len());
                let r = if req.method == Method::Spearman {
                    spearman(&cols[0], &cols[1])
                } else {
                    kendall_tau_b(&cols[0], &cols[1])
                };
                fill(&mut row, r)?;
                rows.push(row);
            }
            Method::FisherZ => {
                let compare = req.compare.as_deref().unwrap();
                let cols = columns(&records, &[&req.measure, compare, &req.target]);
                let n = cols[0].len();
                let mut row = base(n);
                row.conditioning = Some(format!("vs {compare}"));
                let result = spearman(&cols[0], &cols[2]).and_then(|r1| {
                    let r2 = spearman(&cols[1], &cols[2])?;
                    fisher_z_compare(r1, n, r2, n)
                });
                match result {
                    Ok(f) => {
                        row.value = Some(f.z);
                        row.p_value = Some(f.p_value);
                    }
                    Err(e) => fill(&mut row, Err(e))?,
                }
                rows.push(row);
            }
            Method::Granulated => {
                let owned: Vec<RunRecord> = records.iter().map(|r| (*r).clone()).collect();
                let axes: Vec<&str> = req.axes.iter().map(String::as_str).collect();
                let count = columns(&records, &[&req.measure, &req.target])[0].len();
                let mut row = base(count);
                row.conditioning = Some(req.axes.join(";"));
                match granulated_kendall(&owned, &req.measure, &req.target, &axes) {
                    Ok(g) => {
                        row.value = Some(g.psi);
                        rows.push(row);
                        for axis in g.axes {
                            let mut r = base(count);
                            r.conditioning = Some(format!("axis:{}", axis.axis));
                            r.value = Some(axis.mean);
                            if axis.cells_skipped > 0 {
                                r.diagnostic = Some(format!(
                                    "{} cells used, {} skipped",
                                    axis.cells_used, axis.cells_skipped
                                ));
                            }
                            rows.push(r);
                        }
                    }
                    Err(e) => {
                        fill(&mut row, Err(e))?;
                        rows.push(row);
                    }
                }
            }
            Method::Partial => {
                let mut names = vec![req.measure.as_str(), req.target.as_str()];
                names.extend(req.condition.iter().map(String::as_str));
                let mut cols = columns(&records, &names);
                let z = cols.split_off(2);
                for &kind in &req.kinds {
                    let mut row = base(cols[0].len());
                    row.kind = Some(kind.to_string());
                    row.conditioning = Some(req.condition.join(";"));
                    row.permutations = Some(req.permutations);
                    row.seed = Some(req.seed);
                    match partial_corr(&cols[0], &cols[1], &z, kind, req.permutations, req.seed) {
                        Ok(p) => {
                            row.value = Some(p.coefficient);
                            row.p_value = Some(p.p_value);
                            if p.degenerate_residuals {
                                row.diagnostic = Some("degenerate residuals".into());
                            }
                        }
                        Err(e) => fill(&mut row, Err(e))?,
                    }
                    rows.push(row);
                }
            }
            Method::Cmi => {
                let cols = columns(&records, &[&req.measure, &req.target, &req.condition[0]]);
                let mut row = base(cols[0].len());
                row.conditioning = Some(req.condition[0].clone());
                row.permutations = Some(req.permutations);
                row.bins = Some(req.bins);
                row.seed = Some(req.seed);
                match cmi_local_perm_test(&cols[0], &cols[1], &cols[2], req.bins, req.permutations, req.seed) {
                    Ok(t) => {
                        row.value = Some(t.cmi);
                        row.p_value = Some(t.p_value);
                        if t.small_strata > 0 {
                            row.diagnostic = Some(format!("{} singleton strata not permuted", t.small_strata));
                        }
                    }
                    Err(e) => fill(&mut row, Err(e))?,
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}
