//! Plain-text grid dump for debugging.
//!
//! ```text
//! voxelmap 1
//! resolution 0.1
//! origin 0 0 -0.2
//! dims 60 60 62
//! z 0
//! ..##??
//! ```
//!
//! One `z` block per layer, one line per `y` row, one character per cell:
//! `.` free, `#` occupied, `?` unknown.

use super::{CellState, VoxelMap};
use crate::geometry::Vec3;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SnapshotError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Decoded snapshot contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub resolution: f64,
    pub origin: Vec3,
    pub dims: [usize; 3],
    pub states: Vec<CellState>,
}

impl VoxelMap {
    pub fn export_snapshot(&self) -> String {
        let [nx, ny, nz] = self.dims();
        let mut out = String::with_capacity(nx * ny * nz + ny * nz + 128);
        let o = self.origin();
        let _ = writeln!(out, "voxelmap 1");
        let _ = writeln!(out, "resolution {}", self.resolution());
        let _ = writeln!(out, "origin {} {} {}", o[0], o[1], o[2]);
        let _ = writeln!(out, "dims {nx} {ny} {nz}");
        for z in 0..nz {
            let _ = writeln!(out, "z {z}");
            for y in 0..ny {
                for x in 0..nx {
                    out.push(match self.state([x, y, z]) {
                        CellState::Free => '.',
                        CellState::Occupied => '#',
                        CellState::Unknown => '?',
                    });
                }
                out.push('\n');
            }
        }
        out
    }
}

fn malformed(line: usize, message: impl Into<String>) -> SnapshotError {
    SnapshotError::Malformed {
        line,
        message: message.into(),
    }
}

fn header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &str,
    count: usize,
) -> Result<Vec<&'a str>, SnapshotError> {
    let (n, line) = lines.next().ok_or_else(|| malformed(0, format!("missing `{key}`")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(malformed(n, format!("expected `{key}`")));
    }
    let values: Vec<&str> = parts.collect();
    if values.len() != count {
        return Err(malformed(n, format!("`{key}` takes {count} values")));
    }
    Ok(values)
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot, SnapshotError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let version = header(&mut lines, "voxelmap", 1)?;
    if version[0] != "1" {
        return Err(malformed(1, format!("unsupported version {}", version[0])));
    }
    let num = |s: &str, line: usize| s.parse::<f64>().map_err(|e| malformed(line, e.to_string()));
    let res = header(&mut lines, "resolution", 1)?;
    let resolution = num(res[0], 2)?;
    let o = header(&mut lines, "origin", 3)?;
    let origin = Vec3::new(num(o[0], 3)?, num(o[1], 3)?, num(o[2], 3)?);
    let d = header(&mut lines, "dims", 3)?;
    let mut dims = [0usize; 3];
    for i in 0..3 {
        dims[i] = d[i].parse().map_err(|_| malformed(4, "dims must be integers"))?;
    }
    let mut states = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
    for z in 0..dims[2] {
        let (n, l) = lines.next().ok_or_else(|| malformed(0, format!("missing layer {z}")))?;
        if l.trim() != format!("z {z}") {
            return Err(malformed(n, format!("expected layer marker `z {z}`")));
        }
        for _ in 0..dims[1] {
            let (n, row) = lines.next().ok_or_else(|| malformed(0, "truncated layer"))?;
            if row.chars().count() != dims[0] {
                return Err(malformed(n, "row length does not match dims"));
            }
            for c in row.chars() {
                states.push(match c {
                    '.' => CellState::Free,
                    '#' => CellState::Occupied,
                    '?' => CellState::Unknown,
                    other => return Err(malformed(n, format!("unexpected cell `{other}`"))),
                });
            }
        }
    }
    Ok(Snapshot {
        resolution,
        origin,
        dims,
        states,
    })
}
