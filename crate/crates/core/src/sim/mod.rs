//! Closed-loop flight simulation: ground-truth scene, LiDAR, voxel mapping,
//! global path, local planner and rate-limited kinematics.

mod dynamics;
pub mod scene;
mod sensor;

pub use dynamics::{step_dynamics, Tracker};
pub use scene::{Motion, Primitive, Scene, SceneSnapshot, Shape, Solid};
pub use sensor::{lidar_scan, Scan, SensorModel};

use crate::dwa::{plan, DroneState, ObjectiveWeights, PlanError, PlanOutcome, PlannerConfig};
use crate::flight_log::{FlightLog, LogHeader, Outcome, Record, Summary, SCHEMA_VERSION};
use crate::geometry::Vec3;
use crate::global::{plan_naive, plan_rrt_star, GlobalError, GlobalPlannerConfig, Path, PathVariant};
use crate::map::{CellState, LogOddsParams, MapError, VoxelMap};
use crate::scenario::ScenarioSpec;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::time::Instant;
use thiserror::Error;

/// Preferred avoidance direction, selecting the heading weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Avoidance {
    /// Hold height, turn around obstacles.
    #[default]
    Lateral,
    /// Hold heading, climb over obstacles.
    Vertical,
}

impl Avoidance {
    pub fn apply(self, w: &mut ObjectiveWeights) {
        let reference = match self {
            Avoidance::Lateral => ObjectiveWeights::lateral(),
            Avoidance::Vertical => ObjectiveWeights::vertical(),
        };
        w.k_psi = reference.k_psi;
        w.k_z = reference.k_z;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Control period in seconds.
    pub period: f64,
    pub sensor: SensorModel,
    pub map_resolution: f64,
    pub log_odds: LogOddsParams,
    pub switch_radius: f64,
    /// Consecutive iterations without an admissible command before giving up.
    pub stall_limit: usize,
    /// Simulated seconds before giving up.
    pub timeout: f64,
    /// Scans integrated at the start pose before the global plan is computed.
    pub takeoff_scans: usize,
    /// Clear the voxels inside the vehicle's own radius every cycle.
    pub clear_footprint: bool,
    /// Radius around the start position whose obstacle-free voxels are marked
    /// free before takeoff. The LiDAR cannot see the cones straight above and
    /// below the vehicle; without this the launch point starts boxed in by
    /// unknown space. Zero disables it.
    pub launch_survey_radius: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            period: 0.1,
            sensor: SensorModel::default(),
            map_resolution: 0.1,
            log_odds: LogOddsParams::default(),
            switch_radius: 0.3,
            stall_limit: 50,
            timeout: 120.0,
            takeoff_scans: 3,
            clear_footprint: true,
            launch_survey_radius: 1.0,
        }
    }
}

/// Everything that determines a flight besides the scenario and the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlightConfig {
    pub variant: PathVariant,
    pub planner: PlannerConfig,
    pub global: GlobalPlannerConfig,
    pub sim: SimConfig,
}

impl Default for FlightConfig {
    fn default() -> Self {
        Self {
            variant: PathVariant::SizeAware,
            planner: PlannerConfig::default(),
            global: GlobalPlannerConfig::default(),
            sim: SimConfig::default(),
        }
    }
}

impl FlightConfig {
    /// Defaults with the scenario's overrides applied, then the requested
    /// avoidance preference and (when given) path variant.
    pub fn for_scenario(spec: &ScenarioSpec, variant: Option<PathVariant>, avoidance: Avoidance) -> Self {
        let mut cfg = Self::default();
        let o = &spec.overrides;
        if let Some(v) = o.variant {
            cfg.variant = v;
        }
        if let Some(v) = variant {
            cfg.variant = v;
        }
        if let Some(s) = o.safety_distance {
            cfg.global.safety_distance = s;
        }
        if let Some(w) = o.weights {
            cfg.planner.weights = w;
        }
        if let Some(l) = o.limits {
            cfg.planner.limits = l;
        }
        avoidance.apply(&mut cfg.planner.weights);
        cfg
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Scenario(#[from] crate::scenario::ScenarioError),
    #[error("invalid simulation settings: {0}")]
    Config(String),
    #[error("map: {0}")]
    Map(#[from] MapError),
    #[error("local planner: {0}")]
    Plan(#[from] PlanError),
    #[error("global planner: {0}")]
    Global(#[from] GlobalError),
}

/// Tracks voxels that a moving obstacle has left while the map still shows
/// them occupied.
struct LagTracker {
    moving: Vec<usize>,
    static_footprint: HashSet<usize>,
    previous: HashSet<usize>,
    vacated: HashMap<usize, u32>,
}

fn footprint(map: &VoxelMap, snap: &SceneSnapshot, keep: impl Fn(usize) -> bool, out: &mut HashSet<usize>) {
    let res = map.resolution();
    let reach = res * 3f64.sqrt() / 2.0;
    for (solid, &owner) in snap.solids.iter().zip(&snap.owner) {
        if !keep(owner) {
            continue;
        }
        let (lo, hi) = solid_bounds(solid);
        let bounds = map.bounds();
        if (0..3).any(|i| hi[i] + reach < bounds.min[i] || lo[i] - reach > bounds.max[i]) {
            continue;
        }
        let ilo = map.clamped_index(&(lo - Vec3::repeat(reach)));
        let ihi = map.clamped_index(&(hi + Vec3::repeat(reach)));
        for z in ilo[2]..=ihi[2] {
            for y in ilo[1]..=ihi[1] {
                for x in ilo[0]..=ihi[0] {
                    let idx = [x, y, z];
                    if solid.signed_distance(&map.voxel_center(idx)) <= reach {
                        out.insert(map.linear(idx));
                    }
                }
            }
        }
    }
}

fn solid_bounds(s: &Solid) -> (Vec3, Vec3) {
    match *s {
        Solid::Box { center, rotation, half } => {
            let m = rotation.matrix().abs() * half;
            (center - m, center + m)
        }
        Solid::Cylinder { base, radius, height } => (
            base - Vec3::new(radius, radius, 0.0),
            base + Vec3::new(radius, radius, height),
        ),
    }
}

impl LagTracker {
    fn new(scene: &Scene, map: &VoxelMap) -> Self {
        let moving: Vec<usize> = (0..scene.primitives.len())
            .filter(|&i| scene.primitives[i].is_moving())
            .collect();
        let mut static_footprint = HashSet::new();
        if !moving.is_empty() {
            footprint(map, &scene.at(0.0), |o| !moving.contains(&o), &mut static_footprint);
        }
        Self {
            moving,
            static_footprint,
            previous: HashSet::new(),
            vacated: HashMap::new(),
        }
    }

    /// Updates with the ground truth at `cycle`; returns (oldest stale age, stale count).
    fn update(&mut self, map: &VoxelMap, snap: &SceneSnapshot, cycle: u32) -> (u32, u32) {
        if self.moving.is_empty() {
            return (0, 0);
        }
        let mut current = HashSet::new();
        footprint(map, snap, |o| self.moving.contains(&o), &mut current);
        for &v in self.previous.difference(&current) {
            if !self.static_footprint.contains(&v) {
                self.vacated.entry(v).or_insert(cycle);
            }
        }
        self.vacated
            .retain(|v, _| !current.contains(v) && map.state_linear(*v) == CellState::Occupied);
        self.previous = current;
        let oldest = self.vacated.values().map(|&c| cycle - c).max().unwrap_or(0);
        (oldest, self.vacated.len() as u32)
    }
}

fn integrate(map: &mut VoxelMap, scan: &Scan, clear_radius: Option<f64>) -> Result<(), MapError> {
    if map.index_of(&scan.origin).is_none() {
        // Outside the mapped volume nothing can be recorded.
        return Ok(());
    }
    map.integrate_scan_with_free_rays(&scan.origin, &scan.points, &scan.max_range_endpoints)?;
    if let Some(r) = clear_radius {
        map.clear_sphere(&scan.origin, r);
    }
    Ok(())
}

/// Marks voxels within `radius` of `center` that lie entirely outside every
/// obstacle as observed free.
fn survey_launch_area(map: &mut VoxelMap, snap: &SceneSnapshot, center: &Vec3, radius: f64) {
    if radius <= 0.0 {
        return;
    }
    let half_diag = map.resolution() * 3f64.sqrt() / 2.0;
    let lo = map.clamped_index(&(center - Vec3::repeat(radius)));
    let hi = map.clamped_index(&(center + Vec3::repeat(radius)));
    let miss = map.params().miss;
    for z in lo[2]..=hi[2] {
        for y in lo[1]..=hi[1] {
            for x in lo[0]..=hi[0] {
                let idx = [x, y, z];
                let c = map.voxel_center(idx);
                if (c - center).norm() <= radius && snap.clearance(&c) > half_diag && map.state(idx) != CellState::Free
                {
                    map.update_cell(idx, miss);
                }
            }
        }
    }
}

fn global_path(
    spec: &ScenarioSpec,
    map: &VoxelMap,
    cfg: &FlightConfig,
    seed: u64,
) -> Result<(Path, bool), GlobalError> {
    let start = spec.start.position();
    if cfg.variant == PathVariant::Naive {
        return Ok((plan_naive(&start, &spec.goal, &cfg.global)?, false));
    }
    let global = GlobalPlannerConfig {
        rng_seed: seed,
        ..cfg.global
    };
    match plan_rrt_star(map, &start, &spec.goal, &spec.bounds, cfg.variant, &global) {
        Ok((path, _)) => Ok((path, false)),
        Err(GlobalError::NoPath { .. } | GlobalError::Blocked(_)) => {
            Ok((plan_naive(&start, &spec.goal, &cfg.global)?, true))
        }
        Err(e) => Err(e),
    }
}

/// Flies one scenario to completion.
///
/// Each control period: scan, integrate into the map, update the tracked
/// subgoal, run the local planner, apply the command through the rate-limited
/// dynamics, advance moving obstacles and log. The flight ends on reaching the
/// goal, on a ground-truth collision, on timeout or after too many
/// consecutive iterations without an admissible command.
pub fn run_flight(spec: &ScenarioSpec, cfg: &FlightConfig, seed: u64) -> Result<FlightLog, SimError> {
    run_flight_observed(spec, cfg, seed, |_, _| {})
}

/// As [`run_flight`], handing every planner outcome and the time it was
/// computed at to `on_plan`.
pub fn run_flight_observed(
    spec: &ScenarioSpec,
    cfg: &FlightConfig,
    seed: u64,
    mut on_plan: impl FnMut(f64, &PlanOutcome),
) -> Result<FlightLog, SimError> {
    let r_drone = cfg.planner.beam.r_drone;
    spec.validate(r_drone)?;
    cfg.sim.sensor.validate().map_err(SimError::Config)?;
    if !(cfg.sim.period.is_finite() && cfg.sim.period > 0.0) {
        return Err(SimError::Config("period must be positive".into()));
    }
    let scene = spec.scene();
    let mut map = VoxelMap::from_bounds(&spec.bounds, cfg.sim.map_resolution, cfg.sim.log_odds)?;
    let start = DroneState::hover(spec.start.position(), spec.start.yaw);
    let clear_radius = cfg.sim.clear_footprint.then_some(r_drone);

    let initial = scene.at(0.0);
    for _ in 0..cfg.sim.takeoff_scans {
        integrate(&mut map, &lidar_scan(&initial, &start, &cfg.sim.sensor), clear_radius)?;
    }
    survey_launch_area(&mut map, &initial, &start.position(), cfg.sim.launch_survey_radius);
    let (path, path_fallback) = global_path(spec, &map, cfg, seed)?;

    let mut lag = LagTracker::new(&scene, &map);
    let mut tracker = Tracker::new(cfg.sim.switch_radius);
    let mut s = start;
    let mut records = Vec::new();
    let mut stalled = 0usize;
    let period = cfg.sim.period;
    let max_cycles = (cfg.sim.timeout / period).ceil() as u32;
    let outcome = 'flight: {
        for cycle in 0..max_cycles {
            let t = f64::from(cycle) * period;
            let snap = scene.at(t);
            let scan = lidar_scan(&snap, &s, &cfg.sim.sensor);
            let map_start = Instant::now();
            integrate(&mut map, &scan, clear_radius)?;
            let map_ms = map_start.elapsed().as_secs_f64() * 1e3;
            let (map_lag_cycles, stale_voxels) = lag.update(&map, &snap, cycle);

            tracker.update(&s, &path);
            let plan_start = Instant::now();
            let out = plan(&s, tracker.subgoal(&path), &map, &cfg.planner)?;
            let plan_ms = plan_start.elapsed().as_secs_f64() * 1e3;
            on_plan(t, &out);
            stalled = if out.no_admissible { stalled + 1 } else { 0 };

            s = step_dynamics(&s, &out.command, &cfg.planner.limits, period);
            let t_next = f64::from(cycle + 1) * period;
            let clearance = scene.at(t_next).clearance(&s.position());
            records.push(Record {
                t: t_next,
                state: s,
                command: out.command,
                subgoal_index: tracker.index,
                plan_ms,
                map_ms,
                candidates: out.candidates,
                admissible: out.admissible,
                clearance,
                map_lag_cycles,
                stale_voxels,
            });
            if clearance < r_drone {
                break 'flight Outcome::Collision;
            }
            if (s.position() - spec.goal).norm() < spec.goal_tolerance {
                break 'flight Outcome::Success;
            }
            if stalled >= cfg.sim.stall_limit {
                break 'flight Outcome::Stall;
            }
        }
        Outcome::Timeout
    };
    let summary = Summary::from_records(outcome, &start, &records);
    Ok(FlightLog {
        header: LogHeader {
            schema_version: SCHEMA_VERSION,
            scenario: spec.clone(),
            config: *cfg,
            seed,
            start,
            path,
            path_fallback,
        },
        records,
        summary,
    })
}
