//! Plot-ready series extracted from flight logs.
//!
//! Plotting tools read these through their JSON form so they never need the
//! simulator itself. Every figure kind is built only from what the log
//! records: the scenario, the global path and the per-iteration records.

use crate::flight_log::FlightLog;
use crate::geometry::Vec3;
use crate::global::Path;
use crate::sim::Solid;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    /// x-y trajectories over obstacle footprints.
    TopView,
    /// x-z trajectories over obstacle silhouettes.
    SideView,
    Trajectory3d,
    /// Commanded and executed velocities over time.
    Velocities,
    /// Planner wall-time samples per flight.
    TimingBox,
}

impl FigureKind {
    pub const ALL: [FigureKind; 5] = [
        FigureKind::TopView,
        FigureKind::SideView,
        FigureKind::Trajectory3d,
        FigureKind::Velocities,
        FigureKind::TimingBox,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Trajectory,
    GlobalPath,
    Commanded,
    Executed,
    Timing,
}

/// One plotted line or sample set. `z` is present only for 3D figures; for
/// timing series `x` is empty and `y` holds the samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    /// Flight identifier, `<scenario>-<seed>`.
    pub flight: String,
    pub role: Role,
    /// Quantity shown, e.g. `vx` for velocity series.
    pub quantity: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub z: Option<Vec<f64>>,
}

/// Closed polygon outlining one obstacle part in the figure plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outline {
    pub flight: String,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub kind: FigureKind,
    pub series: Vec<Series>,
    pub obstacles: Vec<Outline>,
}

#[derive(Debug, Error, PartialEq)]
pub enum FigureError {
    #[error("no logs given")]
    NoLogs,
    #[error("log {0} has no records")]
    EmptyLog(String),
}

pub fn flight_id(log: &FlightLog) -> String {
    format!("{}-{}", log.header.scenario.name, log.header.seed)
}

/// Extracts the series for `kind` from every log, in the order given.
pub fn figure_data(kind: FigureKind, logs: &[FlightLog]) -> Result<FigureData, FigureError> {
    if logs.is_empty() {
        return Err(FigureError::NoLogs);
    }
    let mut data = FigureData {
        kind,
        series: Vec::new(),
        obstacles: Vec::new(),
    };
    for log in logs {
        let id = flight_id(log);
        if log.records.is_empty() {
            return Err(FigureError::EmptyLog(id));
        }
        match kind {
            FigureKind::TopView | FigureKind::SideView | FigureKind::Trajectory3d => {
                let (a, b) = if kind == FigureKind::SideView { (0, 2) } else { (0, 1) };
                let three = kind == FigureKind::Trajectory3d;
                let pts: Vec<Vec3> = log.positions().collect();
                data.series
                    .push(points_series(&id, Role::Trajectory, "position", &pts, a, b, three));
                data.series.push(points_series(
                    &id,
                    Role::GlobalPath,
                    "position",
                    &log.header.path.waypoints,
                    a,
                    b,
                    three,
                ));
                if !three {
                    for solid in &log.header.scenario.scene().at(0.0).solids {
                        data.obstacles.push(Outline {
                            flight: id.clone(),
                            points: outline(solid, a, b),
                        });
                    }
                }
            }
            FigureKind::Velocities => {
                let t: Vec<f64> = log.records.iter().map(|r| r.t).collect();
                let quantities: [(&str, Pair); 3] = [
                    ("vx", |r| (r.command.vx, r.state.vx)),
                    ("vz", |r| (r.command.vz, r.state.vz)),
                    ("wz", |r| (r.command.wz, r.state.wz)),
                ];
                for (q, f) in quantities {
                    let (cmd, exe): (Vec<f64>, Vec<f64>) = log.records.iter().map(f).unzip();
                    data.series.push(Series {
                        flight: id.clone(),
                        role: Role::Commanded,
                        quantity: q.into(),
                        x: t.clone(),
                        y: cmd,
                        z: None,
                    });
                    data.series.push(Series {
                        flight: id.clone(),
                        role: Role::Executed,
                        quantity: q.into(),
                        x: t.clone(),
                        y: exe,
                        z: None,
                    });
                }
            }
            FigureKind::TimingBox => data.series.push(Series {
                flight: id,
                role: Role::Timing,
                quantity: "plan_ms".into(),
                x: Vec::new(),
                y: log.records.iter().map(|r| r.plan_ms).collect(),
                z: None,
            }),
        }
    }
    Ok(data)
}

/// Commanded and executed value of one quantity in a record.
type Pair = fn(&crate::flight_log::Record) -> (f64, f64);

fn points_series(id: &str, role: Role, quantity: &str, pts: &[Vec3], a: usize, b: usize, three: bool) -> Series {
    Series {
        flight: id.into(),
        role,
        quantity: quantity.into(),
        x: pts.iter().map(|p| p[a]).collect(),
        y: pts.iter().map(|p| p[b]).collect(),
        z: three.then(|| pts.iter().map(|p| p[2]).collect()),
    }
}

/// Convex outline of a solid projected onto axes `a` and `b`.
pub fn outline(solid: &Solid, a: usize, b: usize) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = Vec::new();
    match *solid {
        Solid::Box { center, rotation, half } => {
            for i in 0..8 {
                let sign = |bit: usize| if i & bit == 0 { -1.0 } else { 1.0 };
                let local = Vec3::new(sign(1) * half[0], sign(2) * half[1], sign(4) * half[2]);
                let p = center + rotation * local;
                pts.push([p[a], p[b]]);
            }
        }
        Solid::Cylinder { base, radius, height } => {
            const SIDES: usize = 32;
            for k in 0..SIDES {
                let phi = 2.0 * PI * k as f64 / SIDES as f64;
                for dz in [0.0, height] {
                    let p = base + Vec3::new(radius * phi.cos(), radius * phi.sin(), dz);
                    pts.push([p[a], p[b]]);
                }
            }
        }
    }
    convex_hull(pts)
}

/// Andrew's monotone chain; counter-clockwise, without repeating the first point.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|p, q| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
    pts.dedup_by(|p, q| (p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], p: [f64; 2], q: [f64; 2]| (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 1e-12 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Writes waypoints as `x,y,z` CSV with a header row.
pub fn write_path_csv(path: &Path, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "x,y,z")?;
    for p in &path.waypoints {
        writeln!(w, "{},{},{}", p[0], p[1], p[2])?;
    }
    w.flush()
}
