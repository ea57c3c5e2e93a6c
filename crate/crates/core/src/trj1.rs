//! The TRJ1 binary interchange format for trajectories and loss matrices.
//!
//! Layout (all integers little-endian):
//!
//! | bytes  | content                                        |
//! |--------|------------------------------------------------|
//! | 0..4   | magic `TRJ1` (`54 52 4A 31`)                   |
//! | 4      | version, always 1                              |
//! | 5      | payload kind: 1 = trajectory, 2 = loss matrix  |
//! | 6..8   | reserved, zero                                 |
//! | 8..16  | row count, `u64`                               |
//! | 16..24 | column count, `u64`                            |
//! | 24..   | `rows × cols` IEEE-754 `f64`, row-major        |

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::metricspace::{LossMatrix, WeightTrajectory};

pub const MAGIC: [u8; 4] = *b"TRJ1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum PayloadKind {
    Trajectory = 1,
    LossMatrix = 2,
}

impl TryFrom<u8> for PayloadKind {
    type Error = Error;

    fn try_from(b: u8) -> Result<Self> {
        match b {
            1 => Ok(PayloadKind::Trajectory),
            2 => Ok(PayloadKind::LossMatrix),
            other => Err(Error::Format(format!("unknown payload kind {other}"))),
        }
    }
}

/// A decoded TRJ1 payload before domain validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Payload {
    pub kind: PayloadKind,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl Payload {
    pub fn into_trajectory(self) -> Result<WeightTrajectory> {
        if self.kind != PayloadKind::Trajectory {
            return Err(Error::Format("expected a trajectory payload, found a loss matrix".into()));
        }
        WeightTrajectory::new(self.rows, self.cols, self.values)
    }

    pub fn into_loss_matrix(self) -> Result<LossMatrix> {
        if self.kind != PayloadKind::LossMatrix {
            return Err(Error::Format("expected a loss-matrix payload, found a trajectory".into()));
        }
        LossMatrix::new(self.rows, self.cols, self.values)
    }
}

pub fn header(kind: PayloadKind, rows: u64, cols: u64) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[..4].copy_from_slice(&MAGIC);
    h[4] = VERSION;
    h[5] = kind as u8;
    h[8..16].copy_from_slice(&rows.to_le_bytes());
    h[16..24].copy_from_slice(&cols.to_le_bytes());
    h
}

pub fn encode(kind: PayloadKind, rows: usize, cols: usize, values: &[f64]) -> Result<Vec<u8>> {
    if rows.checked_mul(cols) != Some(values.len()) {
        return Err(Error::Data(format!(
            "{} values do not fill a {rows}×{cols} payload",
            values.len()
        )));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + values.len() * 8);
    out.extend_from_slice(&header(kind, rows as u64, cols as u64));
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<Payload> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "truncated header: {} bytes, need {HEADER_LEN}",
            bytes.len()
        )));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::Format(format!("bad magic {:02X?}", &bytes[..4])));
    }
    if bytes[4] != VERSION {
        return Err(Error::Format(format!("unsupported version {}", bytes[4])));
    }
    let kind = PayloadKind::try_from(bytes[5])?;
    if bytes[6] != 0 || bytes[7] != 0 {
        return Err(Error::Format("reserved header bytes are not zero".into()));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let count = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .and_then(|b| usize::try_from(b).ok())
        .ok_or_else(|| Error::Format(format!("payload size {rows}×{cols} overflows")))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() < count {
        return Err(Error::Format(format!(
            "truncated payload: {} bytes, header declares {count}",
            body.len()
        )));
    }
    if body.len() > count {
        return Err(Error::Format(format!(
            "{} trailing bytes after payload",
            body.len() - count
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Payload { kind, rows: rows as usize, cols: cols as usize, values })
}

pub fn read_payload(path: impl AsRef<Path>) -> Result<Payload> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<WeightTrajectory> {
    read_payload(path)?.into_trajectory()
}

pub fn read_loss_matrix(path: impl AsRef<Path>) -> Result<LossMatrix> {
    read_payload(path)?.into_loss_matrix()
}

fn write_payload(
    path: &Path,
    kind: PayloadKind,
    rows: usize,
    cols: usize,
    values: &[f64],
) -> Result<()> {
    let bytes = encode(kind, rows, cols, values)?;
    write_atomic(path, |w| w.write_all(&bytes))
}

pub fn write_trajectory(path: impl AsRef<Path>, traj: &WeightTrajectory) -> Result<()> {
    write_payload(
        path.as_ref(),
        PayloadKind::Trajectory,
        traj.iterates(),
        traj.param_dim(),
        traj.values(),
    )
}

pub fn write_loss_matrix(path: impl AsRef<Path>, lm: &LossMatrix) -> Result<()> {
    write_payload(path.as_ref(), PayloadKind::LossMatrix, lm.iterates(), lm.samples(), lm.values())
}
