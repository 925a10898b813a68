use crate::geometry::{wrap_angle, Vec3};
use serde::{Deserialize, Serialize};

/// Pose and current commanded velocities (dronecentric `vx`, `vz`, `ωz`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
    pub vx: f64,
    pub vz: f64,
    pub wz: f64,
}

impl DroneState {
    pub fn hover(position: Vec3, yaw: f64) -> Self {
        Self {
            x: position[0],
            y: position[1],
            z: position[2],
            yaw: wrap_angle(yaw),
            vx: 0.0,
            vz: 0.0,
            wz: 0.0,
        }
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn velocity(&self) -> VelocityCommand {
        VelocityCommand::new(self.vx, self.vz, self.wz)
    }

    pub fn pose(&self) -> Pose {
        Pose {
            x: self.x,
            y: self.y,
            z: self.z,
            yaw: self.yaw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub vx: f64,
    pub vz: f64,
    pub wz: f64,
}

impl VelocityCommand {
    pub const STOP: Self = Self {
        vx: 0.0,
        vz: 0.0,
        wz: 0.0,
    };

    pub fn new(vx: f64, vz: f64, wz: f64) -> Self {
        Self { vx, vz, wz }
    }

    /// Speed in the dronecentric XZ plane.
    pub fn speed_xz(&self) -> f64 {
        self.vx.hypot(self.vz)
    }
}

/// Predicted pose `(x′, y′, z′, ψ′)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

impl Pose {
    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }
}

/// Velocity and acceleration bounds. Angular values in rad/s and rad/s².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Limits {
    pub vx_max: f64,
    pub vz_max: f64,
    pub wz_max: f64,
    pub ax_max: f64,
    pub az_max: f64,
    pub alpha_z_max: f64,
    /// Deceleration used for the braking-distance admissibility test.
    pub a_brake: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            vx_max: 0.3,
            vz_max: 0.3,
            wz_max: 45f64.to_radians(),
            ax_max: 1.0,
            az_max: 1.0,
            alpha_z_max: 100f64.to_radians(),
            a_brake: 1.0,
        }
    }
}

impl Limits {
    pub fn validate(&self) -> Result<(), String> {
        let named = [
            ("vx_max", self.vx_max),
            ("vz_max", self.vz_max),
            ("wz_max", self.wz_max),
            ("ax_max", self.ax_max),
            ("az_max", self.az_max),
            ("alpha_z_max", self.alpha_z_max),
            ("a_brake", self.a_brake),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(())
    }
}

/// Objective weights. `alpha + beta + gamma = 1` and `k_psi + k_z = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub k_psi: f64,
    pub k_z: f64,
}

impl ObjectiveWeights {
    /// Prefers turning around obstacles.
    pub fn lateral() -> Self {
        Self {
            alpha: 0.3,
            beta: 0.6,
            gamma: 0.1,
            k_psi: 0.2,
            k_z: 0.8,
        }
    }

    /// Prefers climbing or descending over obstacles.
    pub fn vertical() -> Self {
        Self {
            k_psi: 0.8,
            k_z: 0.2,
            ..Self::lateral()
        }
    }
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self::lateral()
    }
}

/// Geometry of the distance-evaluation ray beam and the vehicle envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeamParams {
    pub r_search: f64,
    pub lambda_psi: f64,
    pub lambda_theta: f64,
    pub psi_max: f64,
    pub theta_max: f64,
    pub d_psi: f64,
    pub d_theta: f64,
    pub r_drone: f64,
    pub h_drone: f64,
}

impl Default for BeamParams {
    fn default() -> Self {
        Self {
            r_search: 1.0,
            lambda_psi: 0.5,
            lambda_theta: 0.75,
            psi_max: 90f64.to_radians(),
            theta_max: 90f64.to_radians(),
            d_psi: 10f64.to_radians(),
            d_theta: 10f64.to_radians(),
            r_drone: 0.4,
            h_drone: 0.3,
        }
    }
}

/// Velocity grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Steps {
    pub vx: f64,
    pub vz: f64,
    pub wz: f64,
}

impl Default for Steps {
    fn default() -> Self {
        Self {
            vx: 0.05,
            vz: 0.05,
            wz: 2.5f64.to_radians(),
        }
    }
}

/// How rays that reach their full length without hitting anything count
/// towards the minimum obstacle distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissPolicy {
    /// Only rays that hit an occupied or unknown voxel lower the minimum.
    #[default]
    Ignore,
    /// Misses contribute their own cast length.
    CastLength,
}

/// Clearance check along each candidate's predicted arc, in addition to the
/// braking test at its end.
///
/// The arc is sampled at `samples - 1` interior instants. At each sample the
/// nearest obstacle must be at least `r_drone + margin` away, or no closer
/// than it is now if the drone is already inside that distance. `margin`
/// absorbs the offset between voxel centres and true surfaces. `samples = 0`
/// disables the check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sweep {
    pub samples: usize,
    pub margin: f64,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            samples: 10,
            margin: 0.1,
        }
    }
}

impl Sweep {
    pub const OFF: Self = Self {
        samples: 0,
        margin: 0.0,
    };
}

/// Whether every admissible candidate gets a complete score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    /// Skip distance evaluation for candidates that provably cannot win.
    #[default]
    Pruned,
    /// Score every admissible candidate.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub weights: ObjectiveWeights,
    pub limits: Limits,
    pub beam: BeamParams,
    pub steps: Steps,
    /// Prediction horizon in seconds.
    pub horizon: f64,
    pub miss_policy: MissPolicy,
    pub mode: PlanMode,
    pub sweep: Sweep,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            weights: ObjectiveWeights::default(),
            limits: Limits::default(),
            beam: BeamParams::default(),
            steps: Steps::default(),
            horizon: 1.0,
            miss_policy: MissPolicy::default(),
            mode: PlanMode::default(),
            sweep: Sweep::default(),
        }
    }
}
