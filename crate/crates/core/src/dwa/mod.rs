//! Three-dimensional dynamic window planner.
//!
//! Each control period the planner enumerates the reachable velocity grid
//! `[vx, vz, ωz]`, drops candidates that cannot brake before the nearest
//! obstacle, and returns the candidate maximising
//!
//! ```text
//! G = α (Kψ·Headψ + Kz·Headz) + β·Dist + γ·Vel
//! ```
//!
//! evaluated at the pose predicted one horizon `Δt` ahead.

mod config;
mod planner;
mod search;
mod terms;
mod validate;

pub use config::{
    BeamParams, DroneState, Limits, MissPolicy, ObjectiveWeights, PlanMode, PlannerConfig, Pose, Steps, Sweep,
    VelocityCommand,
};
pub use planner::{plan, CandidateScore, PlanError, PlanOutcome};
pub use search::{axis_samples, build_search_space, SearchSpace};
pub use terms::{
    beam_angles, distance_term, distance_term_with, head_psi, head_z_batch, is_admissible, predict_pose, ray_direction,
    ray_length, velocity_term,
};
pub use validate::{validate_beam, validate_weights, BeamReport, ConstraintCheck, WeightReport};
