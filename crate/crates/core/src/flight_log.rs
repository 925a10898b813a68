//! Line-delimited JSON flight logs.
//!
//! A log is a header line, one line per control iteration and a closing
//! summary line. Every line is a self-contained JSON object tagged by `type`,
//! so logs cut short by a crash can still be read with [`read_partial`].

use crate::dwa::{DroneState, VelocityCommand};
use crate::global::Path;
use crate::scenario::ScenarioSpec;
use crate::sim::FlightConfig;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{self, BufRead, Write};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub schema_version: u32,
    pub scenario: ScenarioSpec,
    pub config: FlightConfig,
    pub seed: u64,
    pub start: DroneState,
    /// Global path handed to the local planner.
    pub path: Path,
    /// True when the requested global planner failed and the straight line was used.
    pub path_fallback: bool,
}

/// One control iteration. `state` and `clearance` refer to the instant `t`,
/// after `command` was applied for one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub state: DroneState,
    pub command: VelocityCommand,
    pub subgoal_index: usize,
    /// Wall time of the local planner call in milliseconds.
    pub plan_ms: f64,
    /// Wall time of scan integration in milliseconds.
    pub map_ms: f64,
    pub candidates: usize,
    pub admissible: usize,
    /// Ground-truth distance from the drone centre to the nearest obstacle surface.
    pub clearance: f64,
    /// Age in control cycles of the oldest voxel still marked occupied after a
    /// moving obstacle left it.
    pub map_lag_cycles: u32,
    /// Voxels a moving obstacle has left that the map still marks occupied.
    pub stale_voxels: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
    Stall,
}

impl Outcome {
    /// Process exit status for a flight ending this way.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Collision => 2,
            Outcome::Timeout => 3,
            Outcome::Stall => 4,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Success => "success",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
            Outcome::Stall => "stall",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
    pub max: f64,
}

impl TimingStats {
    /// Percentiles use linear interpolation between order statistics.
    pub fn from_samples(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self {
                mean: 0.0,
                median: 0.0,
                p95: 0.0,
                max: 0.0,
            };
        }
        let mut v = samples.to_vec();
        v.sort_by(f64::total_cmp);
        Self {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: percentile(&v, 0.5),
            p95: percentile(&v, 0.95),
            max: v[v.len() - 1],
        }
    }
}

/// `q`-quantile of sorted samples.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub outcome: Outcome,
    pub iterations: usize,
    pub flight_time: f64,
    /// Length of the flown trajectory.
    pub path_length: f64,
    pub min_clearance: f64,
    pub plan_ms: TimingStats,
    pub max_map_lag_cycles: u32,
}

impl Summary {
    pub fn from_records(outcome: Outcome, start: &DroneState, records: &[Record]) -> Self {
        let mut prev = start.position();
        let mut path_length = 0.0;
        for r in records {
            let p = r.state.position();
            path_length += (p - prev).norm();
            prev = p;
        }
        let times: Vec<f64> = records.iter().map(|r| r.plan_ms).collect();
        Self {
            outcome,
            iterations: records.len(),
            flight_time: records.last().map_or(0.0, |r| r.t),
            path_length,
            min_clearance: records.iter().map(|r| r.clearance).fold(f64::INFINITY, f64::min),
            plan_ms: TimingStats::from_samples(&times),
            max_map_lag_cycles: records.iter().map(|r| r.map_lag_cycles).max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlightLog {
    pub header: LogHeader,
    pub records: Vec<Record>,
    pub summary: Summary,
}

impl FlightLog {
    pub fn outcome(&self) -> Outcome {
        self.summary.outcome
    }

    pub fn positions(&self) -> impl Iterator<Item = crate::geometry::Vec3> + '_ {
        std::iter::once(self.header.start.position()).chain(self.records.iter().map(|r| r.state.position()))
    }

    /// Clears wall-clock fields so logs of identical flights compare equal.
    pub fn without_timing(mut self) -> Self {
        for r in &mut self.records {
            r.plan_ms = 0.0;
            r.map_ms = 0.0;
        }
        self.summary.plan_ms = TimingStats::from_samples(&[]);
        self
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        let line = |w: &mut dyn Write, l: Line<'_>| -> io::Result<()> {
            serde_json::to_writer(&mut *w, &l).map_err(io::Error::other)?;
            w.write_all(b"\n")
        };
        line(&mut w, Line::Header(&self.header))?;
        for r in &self.records {
            line(&mut w, Line::Record(r))?;
        }
        line(&mut w, Line::Summary(&self.summary))?;
        w.flush()
    }

    pub fn write(&self, path: &std::path::Path) -> io::Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(io::BufWriter::new(file))
    }

    pub fn read(path: &std::path::Path) -> Result<Self, LogError> {
        let file = std::fs::File::open(path).map_err(|e| LogError::Io(e.to_string()))?;
        read_from(io::BufReader::new(file))
    }
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line<'a> {
    Header(&'a LogHeader),
    Record(&'a Record),
    Summary(&'a Summary),
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum OwnedLine {
    Header(Box<LogHeader>),
    Record(Record),
    Summary(Summary),
}

#[derive(Debug, Error, PartialEq)]
pub enum LogError {
    #[error("log file: {0}")]
    Io(String),
    #[error("unsupported schema version {found} at byte {offset} (expected {SCHEMA_VERSION})")]
    Version { found: u64, offset: u64 },
    #[error("malformed line at byte {offset}: {message}")]
    Malformed { offset: u64, message: String },
    #[error("log truncated at byte {offset}: {message}")]
    Truncated { offset: u64, message: String },
}

/// Header, records and (if present) summary of a possibly incomplete log.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialLog {
    pub header: LogHeader,
    pub records: Vec<Record>,
    pub summary: Option<Summary>,
    /// Offset of the first byte that could not be used, if any.
    pub stopped_at: Option<u64>,
}

struct LineReader<R> {
    inner: R,
    offset: u64,
    buf: String,
}

impl<R: BufRead> LineReader<R> {
    /// Next line with its starting offset and whether it was newline-terminated.
    fn next(&mut self) -> Result<Option<(u64, bool)>, LogError> {
        self.buf.clear();
        let start = self.offset;
        let n = self
            .inner
            .read_line(&mut self.buf)
            .map_err(|e| LogError::Io(e.to_string()))?;
        if n == 0 {
            return Ok(None);
        }
        self.offset += n as u64;
        let complete = self.buf.ends_with('\n');
        Ok(Some((start, complete)))
    }
}

fn parse_line(text: &str, offset: u64) -> Result<OwnedLine, LogError> {
    serde_json::from_str(text).map_err(|e| LogError::Malformed {
        offset,
        message: e.to_string(),
    })
}

fn read_header<R: BufRead>(lines: &mut LineReader<R>) -> Result<LogHeader, LogError> {
    let Some((offset, complete)) = lines.next()? else {
        return Err(LogError::Truncated {
            offset: 0,
            message: "empty log".into(),
        });
    };
    let raw: serde_json::Value = serde_json::from_str(&lines.buf).map_err(|e| {
        if complete {
            LogError::Malformed {
                offset,
                message: e.to_string(),
            }
        } else {
            LogError::Truncated {
                offset,
                message: "incomplete header".into(),
            }
        }
    })?;
    let version = raw.get("schema_version").and_then(serde_json::Value::as_u64);
    match version {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(found) => return Err(LogError::Version { found, offset }),
        None => {
            return Err(LogError::Malformed {
                offset,
                message: "header lacks schema_version".into(),
            })
        }
    }
    match parse_line(&lines.buf, offset)? {
        OwnedLine::Header(h) => Ok(*h),
        _ => Err(LogError::Malformed {
            offset,
            message: "first line must be the header".into(),
        }),
    }
}

/// Strict reader: the log must be complete and well formed.
pub fn read_from(r: impl BufRead) -> Result<FlightLog, LogError> {
    let mut lines = LineReader {
        inner: r,
        offset: 0,
        buf: String::new(),
    };
    let header = read_header(&mut lines)?;
    let mut records: Vec<Record> = Vec::new();
    loop {
        let Some((offset, complete)) = lines.next()? else {
            return Err(LogError::Truncated {
                offset: lines.offset,
                message: "missing summary".into(),
            });
        };
        if !complete {
            return Err(LogError::Truncated {
                offset,
                message: "last line is incomplete".into(),
            });
        }
        match parse_line(&lines.buf, offset)? {
            OwnedLine::Record(rec) => {
                if records.last().is_some_and(|p| rec.t <= p.t) {
                    return Err(LogError::Malformed {
                        offset,
                        message: "records must be strictly time ordered".into(),
                    });
                }
                records.push(rec);
            }
            OwnedLine::Summary(summary) => {
                if let Some((extra, _)) = lines.next()? {
                    return Err(LogError::Malformed {
                        offset: extra,
                        message: "content after summary".into(),
                    });
                }
                return Ok(FlightLog {
                    header,
                    records,
                    summary,
                });
            }
            OwnedLine::Header(_) => {
                return Err(LogError::Malformed {
                    offset,
                    message: "duplicate header".into(),
                })
            }
        }
    }
}

/// Lenient reader for logs of interrupted flights: keeps everything up to the
/// first unusable line. The header must still be intact.
pub fn read_partial(r: impl BufRead) -> Result<PartialLog, LogError> {
    let mut lines = LineReader {
        inner: r,
        offset: 0,
        buf: String::new(),
    };
    let header = read_header(&mut lines)?;
    let mut log = PartialLog {
        header,
        records: Vec::new(),
        summary: None,
        stopped_at: None,
    };
    while let Some((offset, complete)) = lines.next()? {
        let parsed = if complete {
            parse_line(&lines.buf, offset).ok()
        } else {
            None
        };
        match parsed {
            Some(OwnedLine::Record(rec)) if log.summary.is_none() && log.records.last().is_none_or(|p| rec.t > p.t) => {
                log.records.push(rec)
            }
            Some(OwnedLine::Summary(s)) if log.summary.is_none() => log.summary = Some(s),
            _ => {
                log.stopped_at = Some(offset);
                break;
            }
        }
    }
    Ok(log)
}
