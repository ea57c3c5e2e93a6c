use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spearman,
    Kendall,
    Granulated,
    FisherZ,
    Partial,
    Cmi,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Spearman => "spearman",
            Method::Kendall => "kendall",
            Method::Granulated => "granulated",
            Method::FisherZ => "fisher_z",
            Method::Partial => "partial",
            Method::Cmi => "cmi",
        })
    }
}

/// One row of an analysis report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub method: Method,
    /// Coefficient flavour for partial correlations.
    pub kind: Option<String>,
    pub measure: String,
    pub target: String,
    /// `column=value` of the group this row covers, if grouped.
    pub group: Option<String>,
    /// Conditioning set / axes, e.g. `learning_rate`.
    pub conditioning: Option<String>,
    /// Missing when the row is degenerate (see `diagnostic`).
    pub value: Option<f64>,
    pub p_value: Option<f64>,
    pub sample_count: usize,
    pub permutations: Option<usize>,
    pub bins: Option<usize>,
    pub seed: Option<u64>,
    pub diagnostic: Option<String>,
}

impl CorrelationReport {
    pub fn new(method: Method, measure: &str, target: &str, sample_count: usize) -> Self {
        Self {
            method,
            kind: None,
            measure: measure.to_owned(),
            target: target.to_owned(),
            group: None,
            conditioning: None,
            value: None,
            p_value: None,
            sample_count,
            permutations: None,
            bins: None,
            seed: None,
            diagnostic: None,
        }
    }
}

pub fn write_csv<W: Write>(rows: &[CorrelationReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<CorrelationReport>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn to_csv_string(rows: &[CorrelationReport]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::option;
    use proptest::prelude::*;

    fn method() -> impl Strategy<Value = Method> {
        prop_oneof![
            Just(Method::Spearman),
            Just(Method::Kendall),
            Just(Method::Granulated),
            Just(Method::FisherZ),
            Just(Method::Partial),
            Just(Method::Cmi),
        ]
    }

    fn text() -> impl Strategy<Value = String> {
        "[a-z_=0-9.,; ]{1,12}".prop_filter("non-blank", |s| !s.trim().is_empty() && s.trim() == s)
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL
    }

    prop_compose! {
        fn report()(
            method in method(),
            kind in option::of(text()),
            measure in text(),
            target in text(),
            group in option::of(text()),
            conditioning in option::of(text()),
            value in option::of(finite()),
            p_value in option::of(finite()),
            sample_count in 0usize..10_000,
            permutations in option::of(0usize..100_000),
            bins in option::of(2usize..50),
            seed in option::of(any::<u64>()),
            diagnostic in option::of(text()),
        ) -> CorrelationReport {
            CorrelationReport {
                method, kind, measure, target, group, conditioning, value, p_value,
                sample_count, permutations, bins, seed, diagnostic,
            }
        }
    }

    proptest! {
        #[test]
        fn csv_roundtrip(rows in prop::collection::vec(report(), 1..6)) {
            let text = to_csv_string(&rows).unwrap();
            prop_assert_eq!(read_csv(text.as_bytes()).unwrap(), rows);
        }

        #[test]
        fn json_roundtrip(rows in prop::collection::vec(report(), 0..4)) {
            let text = serde_json::to_string(&rows).unwrap();
            let back: Vec<CorrelationReport> = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, rows);
        }
    }
}
