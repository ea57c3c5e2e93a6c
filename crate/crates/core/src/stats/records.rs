//! Run-record tables: one row per trained model.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;

/// Column order of the record CSV.
pub const COLUMNS: [&str; 15] = [
    "run_id",
    "learning_rate",
    "batch_size",
    "width",
    "seed",
    "dataset",
    "init",
    "dim_euclidean",
    "dim_loss",
    "norm",
    "step_size",
    "lb_ratio",
    "gap_loss",
    "gap_accuracy",
    "test_accuracy",
];

/// Hyperparameter columns, usable as grouping / conditioning keys.
pub const HYPERPARAMS: [&str; 6] = ["learning_rate", "batch_size", "width", "seed", "dataset", "init"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initialization {
    #[default]
    Standard,
    Adversarial,
}

impl std::fmt::Display for Initialization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Initialization::Standard => "standard",
            Initialization::Adversarial => "adversarial",
        })
    }
}

impl std::str::FromStr for Initialization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Initialization::Standard),
            "adversarial" => Ok(Initialization::Adversarial),
            other => Err(Error::InvalidArgument(format!("unknown initialization {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunRecord {
    pub run_id: String,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<u64>,
    pub width: Option<u64>,
    pub seed: Option<u64>,
    pub dataset: Option<String>,
    pub init: Option<Initialization>,
    pub dim_euclidean: Option<f64>,
    pub dim_loss: Option<f64>,
    pub norm: Option<f64>,
    pub step_size: Option<f64>,
    pub lb_ratio: Option<f64>,
    pub gap_loss: Option<f64>,
    pub gap_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    /// Why the run produced no measures. Not part of the CSV.
    #[serde(skip)]
    pub failure: Option<String>,
}

impl RunRecord {
    /// Numeric value of a column, if present.
    pub fn numeric(&self, column: &str) -> Option<f64> {
        match column {
            "learning_rate" => self.learning_rate,
            "batch_size" => self.batch_size.map(|v| v as f64),
            "width" => self.width.map(|v| v as f64),
            "seed" => self.seed.map(|v| v as f64),
            "dim_euclidean" => self.dim_euclidean,
            "dim_loss" => self.dim_loss,
            "norm" => self.norm,
            "step_size" => self.step_size,
            "lb_ratio" => self.lb_ratio,
            "gap_loss" => self.gap_loss,
            "gap_accuracy" => self.gap_accuracy,
            "test_accuracy" => self.test_accuracy,
            _ => None,
        }
    }

    /// Value of a column as a grouping level. Equal values give equal strings.
    pub fn level(&self, column: &str) -> Option<String> {
        match column {
            "run_id" => Some(self.run_id.clone()),
            "dataset" => self.dataset.clone(),
            "init" => self.init.map(|i| i.to_string()),
            "batch_size" => self.batch_size.map(|v| v.to_string()),
            "width" => self.width.map(|v| v.to_string()),
            "seed" => self.seed.map(|v| v.to_string()),
            other => self.numeric(other).map(|v| v.to_string()),
        }
    }

    pub fn is_measure_column(column: &str) -> bool {
        COLUMNS.contains(&column) && !HYPERPARAMS.contains(&column) && column != "run_id"
    }
}

/// Records plus the header they were read with.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordTable {
    pub headers: Vec<String>,
    pub records: Vec<RunRecord>,
}

impl RecordTable {
    pub fn new(records: Vec<RunRecord>) -> Self {
        Self { headers: COLUMNS.iter().map(|s| s.to_string()).collect(), records }
    }

    /// Fails with a schema error listing every column in `required` that the
    /// header lacks.
    pub fn require(&self, required: &[&str]) -> Result<()> {
        let missing: Vec<&str> = required
            .iter()
            .copied()
            .filter(|c| !self.headers.iter().any(|h| h == c))
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Schema(format!("missing columns: {}", missing.join(", "))))
        }
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if !headers.iter().any(|h| h == "run_id") {
            return Err(Error::Schema("missing columns: run_id".into()));
        }
        let mut records = Vec::new();
        let mut seen = HashSet::new();
        for (line, row) in rdr.deserialize::<RunRecord>().enumerate() {
            let record = row.map_err(|e| Error::Schema(format!("row {}: {e}", line + 1)))?;
            for column in COLUMNS {
                if let Some(v) = record.numeric(column) {
                    if !v.is_finite() {
                        return Err(Error::Schema(format!(
                            "row {}: non-finite {column}",
                            line + 1
                        )));
                    }
                }
            }
            if !seen.insert(record.run_id.clone()) {
                return Err(Error::Schema(format!("duplicate run_id {:?}", record.run_id)));
            }
            records.push(record);
        }
        Ok(Self { headers, records })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    pub fn write_to<W: Write>(records: &[RunRecord], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        if records.is_empty() {
            w.write_record(COLUMNS)?;
        }
        for r in records {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(records: &[RunRecord]) -> Result<String> {
        let mut buf = Vec::new();
        Self::write_to(records, &mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<()> {
        let text = Self::to_csv_string(records)?;
        write_atomic(path.as_ref(), |w| w.write_all(text.as_bytes()))
    }
}
