//! Objective terms and the constant-velocity pose prediction.

use super::{BeamParams, DroneState, Limits, MissPolicy, ObjectiveWeights, Pose, VelocityCommand};
use crate::geometry::{direction_from_angles, wrap_angle, Vec3};
use crate::map::{RayHit, VoxelMap};
use std::f64::consts::PI;

/// Constant-velocity prediction over `dt`. The translation uses the new yaw
/// `ψ′ = ψ + ωz·dt`.
pub fn predict_pose(s: &DroneState, v: &VelocityCommand, dt: f64) -> Pose {
    let yaw = s.yaw + v.wz * dt;
    let (sy, cy) = yaw.sin_cos();
    Pose {
        x: s.x + v.vx * dt * cy,
        y: s.y + v.vx * dt * sy,
        z: s.z + v.vz * dt,
        yaw,
    }
}

/// Braking-distance test: `|v_xz| <= sqrt(2 · d_col · a_brake)` where `d_col` is
/// the clearance left after subtracting the vehicle radius.
pub fn is_admissible(v: &VelocityCommand, pose: &Pose, map: &VoxelMap, limits: &Limits, beam: &BeamParams) -> bool {
    admissible_given(
        v,
        map.nearest_occupied_distance(&pose.position(), beam.r_search),
        limits,
        beam.r_drone,
    )
}

pub(crate) fn admissible_given(v: &VelocityCommand, nearest: Option<f64>, limits: &Limits, r_drone: f64) -> bool {
    match nearest {
        None => true,
        Some(d) => {
            let d_col = (d - r_drone).max(0.0);
            v.speed_xz() <= (2.0 * d_col * limits.a_brake).sqrt()
        }
    }
}

/// Heading alignment in the horizontal plane, 1 when the goal is dead ahead of
/// the predicted yaw and 0 when it is directly behind.
pub fn head_psi(pose: &Pose, goal: &Vec3) -> f64 {
    let dx = goal[0] - pose.x;
    let dy = goal[1] - pose.y;
    if dx == 0.0 && dy == 0.0 {
        return 1.0;
    }
    let rel = dy.atan2(dx);
    1.0 - wrap_angle(rel - pose.yaw).abs() / PI
}

/// Height alignment normalised over the candidate batch.
pub fn head_z_batch(predicted_z: &[f64], goal_z: f64) -> Vec<f64> {
    let dz: Vec<f64> = predicted_z.iter().map(|z| (goal_z - z).abs()).collect();
    let max = dz.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return vec![1.0; dz.len()];
    }
    dz.iter().map(|d| 1.0 - d / max).collect()
}

/// Ray length shrinking linearly with the yaw and pitch offsets from the beam axis.
pub fn ray_length(psi_i: f64, theta_j: f64, beam: &BeamParams) -> f64 {
    let rho_psi = if beam.psi_max > 0.0 {
        1.0 - beam.lambda_psi * psi_i.abs() / beam.psi_max
    } else {
        1.0
    };
    let rho_theta = if beam.theta_max > 0.0 {
        1.0 - beam.lambda_theta * theta_j.abs() / beam.theta_max
    } else {
        1.0
    };
    beam.r_search * rho_psi * rho_theta
}

fn grid(max: f64, step: f64) -> Vec<f64> {
    if max <= 0.0 {
        return vec![0.0];
    }
    let n = ((2.0 * max) / step + 1e-9).floor() as usize;
    let mut out: Vec<f64> = (0..=n).map(|k| -max + k as f64 * step).collect();
    if let Some(last) = out.last_mut() {
        if max - *last <= 1e-9 {
            *last = max;
        } else {
            out.push(max);
        }
    }
    out
}

/// The beam's angular grid: yaw offsets and pitch offsets, endpoints included.
pub fn beam_angles(beam: &BeamParams) -> (Vec<f64>, Vec<f64>) {
    (grid(beam.psi_max, beam.d_psi), grid(beam.theta_max, beam.d_theta))
}

/// Beam pitch from the candidate's velocity direction (0 at hover).
pub(crate) fn beam_pitch(v: &VelocityCommand) -> f64 {
    if v.vx == 0.0 && v.vz == 0.0 {
        0.0
    } else {
        v.vz.atan2(v.vx)
    }
}

/// World direction of the ray `(ψ_i, θ_j)` for a candidate.
pub fn ray_direction(pose: &Pose, v: &VelocityCommand, psi_i: f64, theta_j: f64) -> Vec3 {
    direction_from_angles(psi_i + pose.yaw, theta_j + beam_pitch(v))
}

/// Normalised clearance score from the minimum ray distance.
pub(crate) fn dist_score(dist_min: f64, beam: &BeamParams) -> f64 {
    ((dist_min - beam.r_drone) / (beam.r_search - beam.r_drone)).clamp(0.0, 1.0)
}

/// Distance term with the default miss policy (only hits lower the minimum).
pub fn distance_term(pose: &Pose, v: &VelocityCommand, map: &VoxelMap, beam: &BeamParams) -> f64 {
    distance_term_with(pose, v, map, beam, MissPolicy::Ignore)
}

/// Casts the whole beam from the predicted position with the plain traversal.
pub fn distance_term_with(
    pose: &Pose,
    v: &VelocityCommand,
    map: &VoxelMap,
    beam: &BeamParams,
    policy: MissPolicy,
) -> f64 {
    let (psis, thetas) = beam_angles(beam);
    let origin = pose.position();
    let mut dist_min = beam.r_search;
    for &p in &psis {
        for &t in &thetas {
            let len = ray_length(p, t, beam);
            if len <= 0.0 {
                continue;
            }
            let r = map.raycast(&origin, &ray_direction(pose, v, p, t), len);
            match (r.hit, policy) {
                (RayHit::Miss, MissPolicy::Ignore) => {}
                _ => dist_min = dist_min.min(r.distance),
            }
        }
    }
    dist_score(dist_min, beam)
}

/// Rewards forward speed when height tracking dominates, or when yaw tracking
/// dominates and the heading is already good.
pub fn velocity_term(v: &VelocityCommand, head_psi: f64, w: &ObjectiveWeights, limits: &Limits) -> f64 {
    let reward = w.k_z >= w.k_psi || head_psi > 0.5;
    if reward {
        (v.vx / limits.vx_max).clamp(0.0, 1.0)
    } else {
        0.0
    }
}
