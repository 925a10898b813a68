//! Flight scenarios: arena, start and goal, obstacles and planner overrides,
//! stored as versioned TOML documents.

use crate::dwa::{BeamParams, Limits, ObjectiveWeights, Pose};
use crate::geometry::{Aabb, Vec3};
use crate::global::PathVariant;
use crate::sim::scene::{Motion, Primitive, Scene, Shape};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

pub const BUILTIN_NAMES: [&str; 7] = [
    "wall",
    "zigzag",
    "narrow_gaps",
    "rings_through",
    "rings_90",
    "moving_stop",
    "moving_continuous",
];

/// Optional planner settings a scenario imposes on top of the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<PathVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safety_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<ObjectiveWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<Limits>,
}

impl Overrides {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

fn default_goal_tolerance() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub schema_version: u32,
    pub name: String,
    pub bounds: Aabb,
    pub start: Pose,
    pub goal: Vec3,
    #[serde(default = "default_goal_tolerance")]
    pub goal_tolerance: f64,
    #[serde(default, skip_serializing_if = "Overrides::is_empty")]
    pub overrides: Overrides,
    #[serde(default)]
    pub primitives: Vec<Primitive>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("scenario document does not parse: {0}")]
    Parse(String),
    #[error("invalid scenario field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("unknown scenario `{name}`; built-ins are: {}", BUILTIN_NAMES.join(", "))]
    Unknown { name: String },
    #[error("scenario file: {0}")]
    Io(String),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

impl ScenarioSpec {
    pub fn scene(&self) -> Scene {
        Scene::new(self.primitives.clone())
    }

    /// Checks schema version, geometry and that the start pose is clear of
    /// every obstacle by at least `r_drone`.
    pub fn validate(&self, r_drone: f64) -> Result<(), ScenarioError> {
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("expected {SCENARIO_SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        let b = &self.bounds;
        if !(0..3).all(|i| b.min[i].is_finite() && b.max[i].is_finite() && b.min[i] < b.max[i]) {
            return Err(invalid("bounds", "min must be below max on every axis"));
        }
        if !b.contains(&self.start.position()) {
            return Err(invalid("start", "outside the arena bounds"));
        }
        if !b.contains(&self.goal) {
            return Err(invalid("goal", "outside the arena bounds"));
        }
        if !(self.goal_tolerance.is_finite() && self.goal_tolerance > 0.0) {
            return Err(invalid("goal_tolerance", "must be positive"));
        }
        if let Some(s) = self.overrides.safety_distance {
            if !(s.is_finite() && s >= 0.0) {
                return Err(invalid("overrides.safety_distance", "must be non-negative"));
            }
        }
        if let Some(l) = &self.overrides.limits {
            l.validate().map_err(|m| invalid("overrides.limits", m))?;
        }
        for (i, p) in self.primitives.iter().enumerate() {
            p.validate().map_err(|m| invalid(format!("primitives[{i}]"), m))?;
        }
        let clearance = self.scene().at(0.0).clearance(&self.start.position());
        if clearance < r_drone {
            return Err(invalid(
                "start",
                format!("only {clearance:.3} m from an obstacle, needs {r_drone} m"),
            ));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario specs always serialise")
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_toml()).map_err(|e| ScenarioError::Io(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(e.to_string()))?;
        load_scenario(&text)
    }
}

/// Parses and validates a scenario document. Omitted planner settings keep
/// their defaults.
pub fn load_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let raw: toml::Value = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    match raw.get("schema_version").and_then(toml::Value::as_integer) {
        Some(v) if v == i64::from(SCENARIO_SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(invalid(
                "schema_version",
                format!("expected {SCENARIO_SCHEMA_VERSION}, found {v}"),
            ))
        }
        None => return Err(invalid("schema_version", "missing")),
    }
    let spec: ScenarioSpec = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    spec.validate(BeamParams::default().r_drone)?;
    Ok(spec)
}

/// Arena floor plus the standard 6 m × 6 m layout.
const ARENA: f64 = 6.0;
const FLOOR_THICKNESS: f64 = 0.2;

fn floor() -> Primitive {
    Primitive::new(
        Shape::Box {
            size: Vec3::new(ARENA, ARENA, FLOOR_THICKNESS),
        },
        Vec3::new(ARENA / 2.0, ARENA / 2.0, -FLOOR_THICKNESS),
    )
    .with_label("floor")
}

fn arena(height: f64) -> Aabb {
    Aabb::new(Vec3::new(0.0, 0.0, -FLOOR_THICKNESS), Vec3::new(ARENA, ARENA, height))
}

fn spec(name: &str, bounds: Aabb, start: Vec3, goal: Vec3, primitives: Vec<Primitive>) -> ScenarioSpec {
    let d = goal - start;
    ScenarioSpec {
        schema_version: SCENARIO_SCHEMA_VERSION,
        name: name.into(),
        bounds,
        start: Pose {
            x: start[0],
            y: start[1],
            z: start[2],
            yaw: d[1].atan2(d[0]),
        },
        goal,
        goal_tolerance: default_goal_tolerance(),
        overrides: Overrides::default(),
        primitives,
    }
}

fn cylinder(label: &str, x: f64, y: f64, radius: f64, height: f64) -> Primitive {
    Primitive::new(Shape::Cylinder { radius, height }, Vec3::new(x, y, 0.0)).with_label(label)
}

fn panel(label: &str, x: f64, y0: f64, y1: f64, thickness: f64, height: f64) -> Primitive {
    Primitive::new(
        Shape::Box {
            size: Vec3::new(thickness, y1 - y0, height),
        },
        Vec3::new(x, (y0 + y1) / 2.0, 0.0),
    )
    .with_label(label)
}

/// Flight height shared by the ground-level scenarios.
pub const CRUISE_HEIGHT: f64 = 0.7;
pub const WALL_HEIGHT: f64 = 1.0;
pub const WALL_LENGTH: f64 = 1.5;
pub const WALL_THICKNESS: f64 = 0.3;
pub const UGV_SPEED: f64 = 0.3;
pub const NARROW_GAP_WIDTHS: [f64; 2] = [1.25, 1.35];
pub const RING_MAJOR_RADIUS: f64 = 0.8;
pub const RING_TUBE_RADIUS: f64 = 0.1;
pub const RINGS_SAFETY_DISTANCE: f64 = 0.2;

fn wall() -> ScenarioSpec {
    let z = CRUISE_HEIGHT;
    let wall = panel(
        "wall",
        3.0,
        3.0 - WALL_LENGTH / 2.0,
        3.0 + WALL_LENGTH / 2.0,
        WALL_THICKNESS,
        WALL_HEIGHT,
    );
    spec(
        "wall",
        arena(4.0),
        Vec3::new(1.0, 3.0, z),
        Vec3::new(5.0, 3.0, z),
        vec![floor(), wall],
    )
}

fn zigzag() -> ScenarioSpec {
    let z = CRUISE_HEIGHT;
    let (r, h) = (0.25, 2.5);
    let pillars = vec![
        cylinder("pillar_1", 2.0, 3.0, r, h),
        cylinder("pillar_2", 2.9, 2.0, r, h),
        cylinder("pillar_3", 2.9, 4.3, r, h),
        cylinder("pillar_4", 3.9, 3.3, r, h),
        cylinder("pillar_5", 4.5, 2.1, r, h),
    ];
    let mut primitives = vec![floor()];
    primitives.extend(pillars);
    spec(
        "zigzag",
        arena(3.0),
        Vec3::new(0.8, 3.0, z),
        Vec3::new(5.3, 3.0, z),
        primitives,
    )
}

fn narrow_gaps() -> ScenarioSpec {
    let z = CRUISE_HEIGHT;
    let height = 2.4;
    let t = 0.2;
    let [g1, g2] = NARROW_GAP_WIDTHS;
    // Two panel rows across the arena, each with one gap. The gaps sit on
    // opposite sides of the straight line, so the drone has to weave.
    let (c1, c2) = (3.3, 2.7);
    let primitives = vec![
        floor(),
        panel("row_1_left", 2.2, 0.0, c1 - g1 / 2.0, t, height),
        panel("row_1_right", 2.2, c1 + g1 / 2.0, ARENA, t, height),
        panel("row_2_left", 3.8, 0.0, c2 - g2 / 2.0, t, height),
        panel("row_2_right", 3.8, c2 + g2 / 2.0, ARENA, t, height),
    ];
    let mut s = spec(
        "narrow_gaps",
        arena(height),
        Vec3::new(1.0, 3.0, z),
        Vec3::new(5.0, 3.0, z),
        primitives,
    );
    s.overrides.limits = Some(Limits {
        vx_max: 0.75,
        ..Limits::default()
    });
    s
}

fn ring(label: &str, center: Vec3, yaw: f64) -> Primitive {
    Primitive::new(
        Shape::Ring {
            major_radius: RING_MAJOR_RADIUS,
            tube_radius: RING_TUBE_RADIUS,
        },
        center,
    )
    .with_yaw(yaw)
    .with_label(label)
}

const RING_HEIGHT: f64 = 1.2;

fn rings_through() -> ScenarioSpec {
    let z = RING_HEIGHT;
    let mut s = spec(
        "rings_through",
        arena(3.0),
        Vec3::new(0.8, 3.0, z),
        Vec3::new(5.2, 3.0, z),
        vec![
            floor(),
            ring("ring_1", Vec3::new(2.3, 3.0, z), 0.0),
            ring("ring_2", Vec3::new(3.8, 3.0, z), 0.0),
        ],
    );
    s.overrides.safety_distance = Some(RINGS_SAFETY_DISTANCE);
    s
}

fn rings_90() -> ScenarioSpec {
    let z = RING_HEIGHT;
    let mut s = spec(
        "rings_90",
        arena(3.0),
        Vec3::new(0.8, 2.0, z),
        Vec3::new(3.5, 5.3, z),
        vec![
            floor(),
            ring("ring_1", Vec3::new(2.0, 2.0, z), 0.0),
            ring("ring_2", Vec3::new(3.5, 3.5, z), FRAC_PI_2),
        ],
    );
    s.start.yaw = 0.0;
    s.overrides.safety_distance = Some(RINGS_SAFETY_DISTANCE);
    s
}

/// Ground robot carrying a tall cylinder that crosses the drone's route.
/// The UGV starts beside the route and crosses it ahead of the drone.
pub const UGV_START: [f64; 2] = [3.8, 2.0];
pub const UGV_START_TIME: f64 = 0.0;

fn moving(name: &str, duration: Option<f64>) -> ScenarioSpec {
    let z = CRUISE_HEIGHT;
    let ugv = cylinder("ugv", UGV_START[0], UGV_START[1], 0.25, 1.8).with_motion(Motion {
        velocity: Vec3::new(0.0, UGV_SPEED, 0.0),
        start_time: UGV_START_TIME,
        duration,
    });
    spec(
        name,
        arena(4.0),
        Vec3::new(1.0, 3.0, z),
        Vec3::new(5.0, 3.0, z),
        vec![floor(), ugv],
    )
}

/// Returns a built-in scenario by name.
pub fn builtin(name: &str) -> Result<ScenarioSpec, ScenarioError> {
    Ok(match name {
        "wall" => wall(),
        "zigzag" => zigzag(),
        "narrow_gaps" => narrow_gaps(),
        "rings_through" => rings_through(),
        "rings_90" => rings_90(),
        // Stops once it has crossed the drone's route.
        "moving_stop" => moving(name, Some(9.0)),
        "moving_continuous" => moving(name, None),
        _ => return Err(ScenarioError::Unknown { name: name.into() }),
    })
}
