//! Per-run JSON manifest pointing at TRJ1 payloads.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::metricspace::{LossMatrix, WeightTrajectory};
use crate::trj1;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergence {
    pub converged: bool,
    pub iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub run_id: String,
    /// Trajectory payload, relative to the manifest's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
    /// Loss-matrix payload, relative to the manifest's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub losses: Option<String>,
    pub tool_version: String,
    #[serde(default)]
    pub seeds: BTreeMap<String, u64>,
    #[serde(default)]
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<Convergence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensions: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// Free-form caller metadata, echoed verbatim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn new(run_id: impl Into<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            run_id: run_id.into(),
            trajectory: None,
            losses: None,
            tool_version: TOOL_VERSION.to_owned(),
            seeds: BTreeMap::new(),
            config: serde_json::Value::Null,
            convergence: None,
            measures: None,
            dimensions: None,
            failure: None,
            metadata: None,
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = self.to_json()?;
        write_atomic(path.as_ref(), |w| w.write_all(text.as_bytes()))
    }

    /// Reads a manifest and checks its schema version and that every
    /// referenced payload exists.
    pub fn load(path: impl AsRef<Path>) -> Result<LoadedManifest> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        if manifest.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported manifest schema version {} (expected {SCHEMA_VERSION})",
                manifest.schema_version
            )));
        }
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let loaded = LoadedManifest { manifest, dir };
        for p in [loaded.trajectory_path(), loaded.losses_path()].into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::Schema(format!("manifest references missing file {}", p.display())));
            }
        }
        Ok(loaded)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedManifest {
    pub manifest: Manifest,
    pub dir: PathBuf,
}

impl LoadedManifest {
    pub fn trajectory_path(&self) -> Option<PathBuf> {
        self.manifest.trajectory.as_ref().map(|p| self.dir.join(p))
    }

    pub fn losses_path(&self) -> Option<PathBuf> {
        self.manifest.losses.as_ref().map(|p| self.dir.join(p))
    }

    pub fn read_trajectory(&self) -> Result<WeightTrajectory> {
        let path = self
            .trajectory_path()
            .ok_or_else(|| Error::Schema("manifest has no trajectory".into()))?;
        trj1::read_trajectory(path)
    }

    pub fn read_losses(&self) -> Result<Option<LossMatrix>> {
        self.losses_path().map(trj1::read_loss_matrix).transpose()
    }
}
