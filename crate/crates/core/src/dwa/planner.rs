use super::terms::{admissible_given, beam_pitch, dist_score};
use super::{
    beam_angles, build_search_space, head_psi, head_z_batch, predict_pose, ray_length, validate_beam, validate_weights,
    velocity_term, DroneState, MissPolicy, PlanMode, PlannerConfig, Pose, VelocityCommand, WeightReport,
};
use crate::geometry::{direction_from_angles, Vec3};
use crate::map::{NearbyObstacles, RayHit, VoxelMap};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("objective weights violate the tuning constraints:\n{0}")]
    InvalidWeights(WeightReport),
    #[error("invalid limits: {0}")]
    InvalidLimits(String),
    #[error("invalid beam: {}", .0.join("; "))]
    InvalidBeam(Vec<String>),
    #[error("prediction horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("velocity steps must be positive and finite")]
    InvalidSteps,
    #[error("subgoal is not finite")]
    InvalidSubgoal,
    #[error("sweep margin must be non-negative and finite, got {0}")]
    InvalidSweep(f64),
}

/// Score record for one candidate. `head_z`, `dist` and `g` are absent for
/// inadmissible candidates; in pruned mode `dist` and `g` are also absent for
/// candidates that were ruled out before their beam was fully cast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub command: VelocityCommand,
    pub pose: Pose,
    pub admissible: bool,
    pub head_psi: f64,
    pub head_z: Option<f64>,
    pub vel: f64,
    pub dist: Option<f64>,
    pub g: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub command: VelocityCommand,
    /// Index into `scores` of the chosen candidate.
    pub chosen: Option<usize>,
    /// Set when no candidate passed the braking test; `command` is then a stop.
    pub no_admissible: bool,
    pub scores: Vec<CandidateScore>,
    pub candidates: usize,
    pub admissible: usize,
    /// Candidates whose distance term was (at least partly) evaluated.
    pub evaluated: usize,
}

impl PlanOutcome {
    pub fn chosen_score(&self) -> Option<&CandidateScore> {
        self.chosen.map(|i| &self.scores[i])
    }
}

/// Deterministic preference between equally scored commands: faster forward,
/// then less turning, then less climbing, then left turns, then climbing.
pub(crate) fn tie_break(a: &VelocityCommand, b: &VelocityCommand) -> Ordering {
    a.vx.total_cmp(&b.vx)
        .then_with(|| b.wz.abs().total_cmp(&a.wz.abs()))
        .then_with(|| b.vz.abs().total_cmp(&a.vz.abs()))
        .then_with(|| a.wz.total_cmp(&b.wz))
        .then_with(|| a.vz.total_cmp(&b.vz))
}

#[inline]
fn objective(cfg: &PlannerConfig, hp: f64, hz: f64, dist: f64, vel: f64) -> f64 {
    let w = &cfg.weights;
    w.alpha * (w.k_psi * hp + w.k_z * hz) + w.beta * dist + w.gamma * vel
}

struct Ray {
    psi: f64,
    theta: f64,
    len: f64,
}

fn check_config(cfg: &PlannerConfig) -> Result<(), PlanError> {
    cfg.limits.validate().map_err(PlanError::InvalidLimits)?;
    if !(cfg.horizon.is_finite() && cfg.horizon > 0.0) {
        return Err(PlanError::InvalidHorizon(cfg.horizon));
    }
    let s = &cfg.steps;
    if ![s.vx, s.vz, s.wz].iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(PlanError::InvalidSteps);
    }
    if !(cfg.sweep.margin.is_finite() && cfg.sweep.margin >= 0.0) {
        return Err(PlanError::InvalidSweep(cfg.sweep.margin));
    }
    let beam = validate_beam(&cfg.beam);
    if !beam.usable() {
        return Err(PlanError::InvalidBeam(beam.hard));
    }
    let report = validate_weights(&cfg.weights, &cfg.limits, &cfg.beam, cfg.horizon);
    if !report.passed() {
        return Err(PlanError::InvalidWeights(report));
    }
    Ok(())
}

/// Selects the velocity command maximising the objective over the admissible
/// reachable grid.
pub fn plan(s: &DroneState, subgoal: &Vec3, map: &VoxelMap, cfg: &PlannerConfig) -> Result<PlanOutcome, PlanError> {
    check_config(cfg)?;
    if !(subgoal[0].is_finite() && subgoal[1].is_finite() && subgoal[2].is_finite()) {
        return Err(PlanError::InvalidSubgoal);
    }
    let beam = &cfg.beam;
    let limits = &cfg.limits;
    let space = build_search_space(s, limits, &cfg.steps, cfg.horizon);
    let poses: Vec<Pose> = space
        .candidates
        .iter()
        .map(|v| predict_pose(s, v, cfg.horizon))
        .collect();

    // Braking test at the end of each arc, then the clearance sweep along it.
    // Each candidate only needs obstacles within its stopping envelope or
    // swept radius, so nearby surface voxels are gathered once.
    let here = s.position();
    let envelope =
        |v: &VelocityCommand| (beam.r_drone + v.speed_xz().powi(2) / (2.0 * limits.a_brake) + 1e-6).min(beam.r_search);
    let swept = beam.r_drone + cfg.sweep.margin;
    let reach = space
        .candidates
        .iter()
        .zip(&poses)
        .map(|(v, p)| {
            let travel = (p.position() - here).norm().max(v.speed_xz() * cfg.horizon);
            1.5 * travel + envelope(v).max(swept)
        })
        .fold(swept, f64::max)
        + 1e-6;
    let near = NearbyObstacles::collect(map, &here, reach);
    let floor = near.nearest(map, &here, swept).map_or(swept, |d| d.min(swept));
    let admissible: Vec<bool> = space
        .candidates
        .iter()
        .zip(&poses)
        .map(|(v, p)| {
            admissible_given(v, near.nearest(map, &p.position(), envelope(v)), limits, beam.r_drone)
                && sweep_clear(s, v, cfg, map, &near, floor)
        })
        .collect();

    let mut scores: Vec<CandidateScore> = space
        .candidates
        .iter()
        .zip(&poses)
        .zip(&admissible)
        .map(|((v, p), &ok)| {
            let hp = head_psi(p, subgoal);
            CandidateScore {
                command: *v,
                pose: *p,
                admissible: ok,
                head_psi: hp,
                head_z: None,
                vel: velocity_term(v, hp, &cfg.weights, limits),
                dist: None,
                g: None,
            }
        })
        .collect();
    let valid: Vec<usize> = (0..scores.len()).filter(|&i| admissible[i]).collect();
    let n_candidates = scores.len();
    if valid.is_empty() {
        return Ok(PlanOutcome {
            command: VelocityCommand::STOP,
            chosen: None,
            no_admissible: true,
            scores,
            candidates: n_candidates,
            admissible: 0,
            evaluated: 0,
        });
    }
    let zs: Vec<f64> = valid.iter().map(|&i| poses[i].z).collect();
    for (&i, hz) in valid.iter().zip(head_z_batch(&zs, subgoal[2])) {
        scores[i].head_z = Some(hz);
    }

    let (psis, thetas) = beam_angles(beam);
    let mut rays: Vec<Ray> = psis
        .iter()
        .flat_map(|&psi| thetas.iter().map(move |&theta| (psi, theta)))
        .map(|(psi, theta)| Ray {
            psi,
            theta,
            len: ray_length(psi, theta, beam),
        })
        .filter(|r| r.len > 0.0)
        .collect();
    rays.sort_by(|a, b| b.len.total_cmp(&a.len));

    // Upper bound of each candidate's objective (distance term at its maximum).
    let mut order: Vec<(usize, f64)> = valid
        .iter()
        .map(|&i| {
            let c = &scores[i];
            (i, objective(cfg, c.head_psi, c.head_z.unwrap_or(0.0), 1.0, c.vel))
        })
        .collect();
    order.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| tie_break(&scores[b.0].command, &scores[a.0].command))
    });

    map.warm_query_index();
    let mut best: Option<(usize, f64)> = None;
    let mut evaluated = 0;
    for &(i, bound) in &order {
        let prune = cfg.mode == PlanMode::Pruned;
        if prune {
            if let Some((_, g_best)) = best {
                if bound < g_best {
                    break;
                }
            }
        }
        evaluated += 1;
        let c = &scores[i];
        let (hp, hz, vel) = (c.head_psi, c.head_z.unwrap_or(0.0), c.vel);
        let g_best = best.map(|b| b.1);
        let hopeless = |d: f64| prune && g_best.is_some_and(|gb| objective(cfg, hp, hz, dist_score(d, beam), vel) < gb);
        let Some(dmin) = beam_min_distance(map, &c.pose, &c.command, &rays, cfg, hopeless) else {
            continue;
        };
        let dist = dist_score(dmin, beam);
        let g = objective(cfg, hp, hz, dist, vel);
        let sc = &mut scores[i];
        sc.dist = Some(dist);
        sc.g = Some(g);
        let better = match best {
            None => true,
            Some((j, gb)) => match g.total_cmp(&gb) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => tie_break(&scores[i].command, &scores[j].command) == Ordering::Greater,
            },
        };
        if better {
            best = Some((i, g));
        }
    }
    let (chosen, _) = best.expect("at least one admissible candidate is always evaluated");
    Ok(PlanOutcome {
        command: scores[chosen].command,
        chosen: Some(chosen),
        no_admissible: false,
        candidates: n_candidates,
        admissible: valid.len(),
        evaluated,
        scores,
    })
}

/// True when every interior sample of the candidate's arc keeps at least
/// `floor` from the nearest obstacle.
fn sweep_clear(
    s: &DroneState,
    v: &VelocityCommand,
    cfg: &PlannerConfig,
    map: &VoxelMap,
    near: &NearbyObstacles,
    floor: f64,
) -> bool {
    let n = cfg.sweep.samples;
    if n < 2 || v.speed_xz() == 0.0 {
        return true;
    }
    // Distances change by at most the distance travelled, so samples that
    // cannot violate the floor are skipped.
    let travel = v.speed_xz() * cfg.horizon;
    let step = travel / n as f64;
    // Kept within the reach the obstacle set was collected for.
    let look = (4.0 * step).min(0.5 * travel);
    let mut slack = 0.0;
    for k in 1..n {
        slack -= step;
        if slack > 0.0 {
            continue;
        }
        let p = predict_pose(s, v, cfg.horizon * k as f64 / n as f64).position();
        match near.nearest(map, &p, floor + look) {
            Some(d) if d < floor - 1e-9 => return false,
            Some(d) => slack = d - floor,
            None => slack = look,
        }
    }
    true
}

/// Minimum hit distance over the beam, or `None` once `abandon` reports that
/// the running minimum already rules the candidate out.
fn beam_min_distance(
    map: &VoxelMap,
    pose: &Pose,
    v: &VelocityCommand,
    rays: &[Ray],
    cfg: &PlannerConfig,
    abandon: impl Fn(f64) -> bool,
) -> Option<f64> {
    let beam = &cfg.beam;
    let origin = pose.position();
    let pitch = beam_pitch(v);
    let mut dmin = beam.r_search;
    for r in rays {
        if dmin <= beam.r_drone {
            break;
        }
        let len = r.len.min(dmin);
        let dir = direction_from_angles(r.psi + pose.yaw, r.theta + pitch);
        let hit = map.raycast_fast(&origin, &dir, len);
        let counts = !(hit.hit == RayHit::Miss && cfg.miss_policy == MissPolicy::Ignore);
        if counts && hit.distance < dmin {
            dmin = hit.distance;
            if abandon(dmin) {
                return None;
            }
        }
    }
    Some(dmin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dwa::{distance_term_with, ObjectiveWeights};
    use crate::map::{CellState, LogOddsParams};

    fn corridor() -> VoxelMap {
        let mut m = VoxelMap::new(Vec3::new(-1.0, -2.0, -1.0), 0.1, [80, 40, 30], LogOddsParams::default()).unwrap();
        m.fill(CellState::Free);
        m
    }

    fn wall_ahead(m: &mut VoxelMap, x: f64) {
        for (idx, _) in m.cells().collect::<Vec<_>>() {
            let c = m.voxel_center(idx);
            if (c[0] - x).abs() < 0.15 && c[1].abs() < 0.75 && c[2] > -0.5 && c[2] < 0.5 {
                m.set_state(idx, CellState::Occupied);
            }
        }
    }

    #[test]
    fn open_corridor_goes_straight() {
        let m = corridor();
        let s = DroneState::hover(Vec3::zeros(), 0.0);
        let out = plan(&s, &Vec3::new(5.0, 0.0, 0.0), &m, &PlannerConfig::default()).unwrap();
        assert_eq!(out.command.wz, 0.0);
        assert_eq!(out.command.vz, 0.0);
        assert!(out.command.vx > 0.0);
    }

    #[test]
    fn pruned_and_full_agree() {
        let mut m = corridor();
        wall_ahead(&mut m, 1.2);
        let s = DroneState::hover(Vec3::zeros(), 0.0);
        for w in [ObjectiveWeights::lateral(), ObjectiveWeights::vertical()] {
            let mut cfg = PlannerConfig {
                weights: w,
                ..PlannerConfig::default()
            };
            let pruned = plan(&s, &Vec3::new(5.0, 0.0, 0.0), &m, &cfg).unwrap();
            cfg.mode = PlanMode::Full;
            let full = plan(&s, &Vec3::new(5.0, 0.0, 0.0), &m, &cfg).unwrap();
            assert_eq!(pruned.command, full.command);
            assert_eq!(full.evaluated, full.admissible);
            assert!(pruned.evaluated <= full.evaluated);
            // Every full score matches the plain beam evaluation.
            for sc in full.scores.iter().filter(|s| s.admissible).step_by(97) {
                let plain = distance_term_with(&sc.pose, &sc.command, &m, &cfg.beam, cfg.miss_policy);
                assert_eq!(sc.dist, Some(plain));
            }
        }
    }

    #[test]
    fn close_wall_limits_forward_speed() {
        let mut m = corridor();
        wall_ahead(&mut m, 1.0);
        let s = DroneState::hover(Vec3::new(0.2, 0.0, 0.0), 0.0);
        let cfg = PlannerConfig {
            mode: PlanMode::Full,
            ..PlannerConfig::default()
        };
        let out = plan(&s, &Vec3::new(5.0, 0.0, 0.0), &m, &cfg).unwrap();
        // Straight-ahead fast candidates end up too close to brake.
        let fast = out
            .scores
            .iter()
            .find(|c| c.command.vx == 0.3 && c.command.vz == 0.0 && c.command.wz == 0.0)
            .unwrap();
        assert!(!fast.admissible);
        let chosen = out.chosen_score().unwrap();
        let d = m.nearest_occupied_distance(&chosen.pose.position(), cfg.beam.r_search);
        assert!(admissible_given(&chosen.command, d, &cfg.limits, cfg.beam.r_drone));
    }

    #[test]
    fn subgoal_at_current_position_still_moves() {
        let m = corridor();
        let s = DroneState::hover(Vec3::zeros(), 0.0);
        let out = plan(&s, &Vec3::zeros(), &m, &PlannerConfig::default()).unwrap();
        assert!(out.command.vx > 0.0);
    }

    #[test]
    fn enclosed_drone_stops() {
        let mut m = corridor();
        m.fill(CellState::Occupied);
        let s = DroneState::hover(Vec3::zeros(), 0.0);
        let out = plan(&s, &Vec3::new(1.0, 0.0, 0.0), &m, &PlannerConfig::default()).unwrap();
        // Zero speed is always admissible.
        assert!(!out.no_admissible);
        assert_eq!(out.command.vx, 0.0);
        assert_eq!(out.command.vz, 0.0);
    }

    #[test]
    fn rejects_invalid_weights() {
        let m = corridor();
        let s = DroneState::hover(Vec3::zeros(), 0.0);
        let cfg = PlannerConfig {
            weights: ObjectiveWeights {
                alpha: 0.5,
                beta: 0.4,
                gamma: 0.1,
                k_psi: 0.2,
                k_z: 0.8,
            },
            ..PlannerConfig::default()
        };
        assert!(matches!(
            plan(&s, &Vec3::x(), &m, &cfg),
            Err(PlanError::InvalidWeights(_))
        ));
    }

    #[test]
    fn tie_break_is_total_on_distinct_commands() {
        let a = VelocityCommand::new(0.1, 0.0, 0.1);
        let b = VelocityCommand::new(0.1, 0.0, -0.1);
        assert_eq!(tie_break(&a, &b), Ordering::Greater);
        let c = VelocityCommand::new(0.1, 0.05, 0.0);
        let d = VelocityCommand::new(0.1, -0.05, 0.0);
        assert_eq!(tie_break(&c, &d), Ordering::Greater);
        assert_eq!(tie_break(&VelocityCommand::new(0.2, 0.3, 0.5), &c), Ordering::Greater);
    }
}
