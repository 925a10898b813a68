//! Waypoint path generation: a straight-line baseline and RRT* with either
//! line-of-sight or vehicle-size-aware edge validation.

mod collision;
mod rrt;

pub use collision::{point_clear, segment_clear, segment_clear_with, SegmentChecker};
pub use rrt::{plan_rrt_star, RrtReport};

use crate::geometry::Vec3;
use serde::{Deserialize, Serialize};
use std::io;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathVariant {
    /// Straight segment from start to goal, obstacle-blind.
    Naive,
    /// RRT* validating edges by line of sight only.
    NotSizeAware,
    /// RRT* keeping every edge at least the safety distance away from obstacles.
    SizeAware,
}

/// How never-observed voxels are treated by the global planner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownPolicy {
    /// Unobserved space may be planned through; the local planner handles it.
    #[default]
    Free,
    /// Unobserved space is an obstacle.
    Obstacle,
}

impl UnknownPolicy {
    pub(crate) fn solid(self) -> fn(crate::map::CellState) -> bool {
        match self {
            UnknownPolicy::Free => |s| s == crate::map::CellState::Occupied,
            UnknownPolicy::Obstacle => crate::map::CellState::is_blocking,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<Vec3>,
    pub variant: PathVariant,
    pub cost: f64,
}

impl Path {
    pub fn start(&self) -> Vec3 {
        self.waypoints[0]
    }

    pub fn goal(&self) -> Vec3 {
        *self.waypoints.last().expect("paths hold at least two waypoints")
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Writes the path as JSON.
    pub fn save(&self, path: &std::path::Path) -> io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        std::fs::write(path, text)
    }

    /// Loads a path written by [`Path::save`] and checks its invariants.
    pub fn load(path: &std::path::Path) -> Result<Self, GlobalError> {
        let text = std::fs::read_to_string(path).map_err(|e| GlobalError::Io(e.to_string()))?;
        let p: Path = serde_json::from_str(&text).map_err(|e| GlobalError::Io(e.to_string()))?;
        p.check()?;
        Ok(p)
    }

    /// Validates the structural invariants: at least two waypoints, all finite,
    /// consecutive waypoints distinct.
    pub fn check(&self) -> Result<(), GlobalError> {
        if self.waypoints.len() < 2 {
            return Err(GlobalError::Degenerate("a path needs at least two waypoints".into()));
        }
        if self.waypoints.iter().any(|w| !w.iter().all(|v| v.is_finite())) {
            return Err(GlobalError::Degenerate("waypoints must be finite".into()));
        }
        if self.waypoints.windows(2).any(|w| w[0] == w[1]) {
            return Err(GlobalError::Degenerate("consecutive waypoints must differ".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlobalPlannerConfig {
    pub k_length: f64,
    pub k_height: f64,
    pub safety_distance: f64,
    pub max_iterations: usize,
    pub steer_step: f64,
    pub goal_bias: f64,
    pub rewire_radius: f64,
    pub rng_seed: u64,
    pub unknown: UnknownPolicy,
    /// Reserved; flights never replan the global path.
    pub replan: bool,
}

impl Default for GlobalPlannerConfig {
    fn default() -> Self {
        Self {
            k_length: 1.0,
            k_height: 0.5,
            safety_distance: 0.5,
            max_iterations: 5000,
            steer_step: 0.5,
            goal_bias: 0.1,
            rewire_radius: 1.5,
            rng_seed: 0,
            unknown: UnknownPolicy::Free,
            replan: false,
        }
    }
}

impl GlobalPlannerConfig {
    pub fn validate(&self) -> Result<(), GlobalError> {
        let bad = |m: &str| Err(GlobalError::InvalidConfig(m.into()));
        if !(self.safety_distance.is_finite() && self.safety_distance >= 0.0) {
            return bad("safety_distance must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return bad("goal_bias must lie in [0, 1]");
        }
        if !(self.steer_step.is_finite() && self.steer_step > 0.0) {
            return bad("steer_step must be positive");
        }
        if !(self.rewire_radius.is_finite() && self.rewire_radius > 0.0) {
            return bad("rewire_radius must be positive");
        }
        if !(self.k_length >= 0.0 && self.k_height >= 0.0) {
            return bad("cost weights must be non-negative");
        }
        Ok(())
    }

    /// Edge validation radius for a variant.
    pub fn safety_for(&self, variant: PathVariant) -> f64 {
        match variant {
            PathVariant::SizeAware => self.safety_distance,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GlobalError {
    #[error("degenerate request: {0}")]
    Degenerate(String),
    #[error("invalid global planner configuration: {0}")]
    InvalidConfig(String),
    #[error("{0} is not clear of obstacles")]
    Blocked(&'static str),
    #[error("no path found after {iterations} iterations")]
    NoPath { iterations: usize },
    #[error("path file: {0}")]
    Io(String),
}

/// Weighted path length plus the height deviation of every waypoint but the
/// last from the goal height.
pub fn path_cost(waypoints: &[Vec3], cfg: &GlobalPlannerConfig) -> f64 {
    let n = waypoints.len();
    if n == 0 {
        return 0.0;
    }
    let z_goal = waypoints[n - 1][2];
    let length: f64 = waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let height: f64 = waypoints[..n - 1].iter().map(|g| (z_goal - g[2]).abs()).sum();
    cfg.k_length * length + cfg.k_height * height
}

pub fn plan_naive(start: &Vec3, goal: &Vec3, cfg: &GlobalPlannerConfig) -> Result<Path, GlobalError> {
    if start == goal {
        return Err(GlobalError::Degenerate("start equals goal".into()));
    }
    let waypoints = vec![*start, *goal];
    Ok(Path {
        cost: path_cost(&waypoints, cfg),
        waypoints,
        variant: PathVariant::Naive,
    })
}
