use crate::dwa::{predict_pose, DroneState, Limits, VelocityCommand};
use crate::global::Path;
use serde::{Deserialize, Serialize};

fn slew(current: f64, target: f64, rate: f64, dt: f64) -> f64 {
    current + (target - current).clamp(-rate * dt, rate * dt)
}

/// Rate-limited velocity tracking followed by constant-velocity integration.
///
/// The command is first clamped to the static velocity bounds; each component
/// then moves toward it by at most its acceleration limit times `dt`.
pub fn step_dynamics(s: &DroneState, cmd: &VelocityCommand, limits: &Limits, dt: f64) -> DroneState {
    let target = VelocityCommand::new(
        cmd.vx.clamp(0.0, limits.vx_max),
        cmd.vz.clamp(-limits.vz_max, limits.vz_max),
        cmd.wz.clamp(-limits.wz_max, limits.wz_max),
    );
    let achieved = VelocityCommand::new(
        slew(s.vx, target.vx, limits.ax_max, dt),
        slew(s.vz, target.vz, limits.az_max, dt),
        slew(s.wz, target.wz, limits.alpha_z_max, dt),
    );
    let pose = predict_pose(s, &achieved, dt);
    DroneState {
        x: pose.x,
        y: pose.y,
        z: pose.z,
        yaw: crate::geometry::wrap_angle(pose.yaw),
        vx: achieved.vx,
        vz: achieved.vz,
        wz: achieved.wz,
    }
}

/// Subgoal selection along a waypoint path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tracker {
    /// Index into the path's waypoints; starts at 1, the first waypoint after the start.
    pub index: usize,
    pub switch_radius: f64,
}

impl Tracker {
    pub fn new(switch_radius: f64) -> Self {
        Self {
            index: 1,
            switch_radius,
        }
    }

    /// Advances past every intermediate waypoint that is within the switch
    /// radius or whose perpendicular plane the drone has already crossed. The
    /// final waypoint is never skipped.
    pub fn update(&mut self, s: &DroneState, path: &Path) {
        let p = s.position();
        let last = path.waypoints.len() - 1;
        while self.index < last {
            let w = path.waypoints[self.index];
            let prev = path.waypoints[self.index - 1];
            let close = (p - w).norm() < self.switch_radius;
            let passed = (p - w).dot(&(w - prev)) > 0.0;
            if close || passed {
                self.index += 1;
            } else {
                break;
            }
        }
    }

    pub fn subgoal<'a>(&self, path: &'a Path) -> &'a crate::geometry::Vec3 {
        &path.waypoints[self.index]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::global::PathVariant;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn one_step_from_hover_is_rate_limited() {
        let s = DroneState::hover(Vec3::zeros(), 0.0);
        let n = step_dynamics(&s, &VelocityCommand::new(0.3, 0.0, 0.0), &Limits::default(), 0.1);
        assert_relative_eq!(n.vx, 0.1, epsilon = 1e-12);
        assert_relative_eq!(n.x, 0.01, epsilon = 1e-12);
    }

    #[test]
    fn matching_command_is_uniform_motion() {
        let mut s = DroneState::hover(Vec3::new(1.0, 2.0, 1.0), 0.3);
        s.vx = 0.2;
        s.vz = 0.1;
        let cmd = s.velocity();
        let n = step_dynamics(&s, &cmd, &Limits::default(), 0.1);
        let expected = predict_pose(&s, &cmd, 0.1);
        assert_relative_eq!(n.x, expected.x);
        assert_relative_eq!(n.y, expected.y);
        assert_relative_eq!(n.z, expected.z);
        assert_eq!(n.velocity(), cmd);
    }

    #[test]
    fn command_beyond_limit_saturates() {
        let mut s = DroneState::hover(Vec3::zeros(), 0.0);
        let limits = Limits::default();
        for _ in 0..20 {
            s = step_dynamics(&s, &VelocityCommand::new(5.0, 0.0, 0.0), &limits, 0.1);
        }
        assert_relative_eq!(s.vx, limits.vx_max);
    }

    fn path(points: &[[f64; 3]]) -> Path {
        Path {
            waypoints: points.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect(),
            variant: PathVariant::NotSizeAware,
            cost: 0.0,
        }
    }

    #[test]
    fn tracker_switching() {
        let p = path(&[[0.0, 0.0, 1.0], [2.0, 0.0, 1.0], [2.0, 2.0, 1.0]]);
        let mut t = Tracker::new(0.3);
        t.update(&DroneState::hover(Vec3::new(0.0, 0.0, 1.0), 0.0), &p);
        assert_eq!(t.index, 1);
        t.update(&DroneState::hover(Vec3::new(1.8, 0.0, 1.0), 0.0), &p);
        assert_eq!(t.index, 2);
        // The final waypoint is never skipped.
        t.update(&DroneState::hover(Vec3::new(2.0, 2.0, 1.0), 0.0), &p);
        assert_eq!(t.index, 2);
        let mut t = Tracker::new(0.3);
        t.update(&DroneState::hover(Vec3::new(2.4, -0.5, 1.0), 0.0), &p);
        assert_eq!(t.index, 2, "crossing the waypoint's plane also switches");
    }

    proptest! {
        #[test]
        fn velocity_changes_respect_acceleration_limits(
            vx in 0.0f64..0.3, vz in -0.3f64..0.3, wz in -0.7f64..0.7,
            cx in -1.0f64..1.0, cz in -1.0f64..1.0, cw in -2.0f64..2.0,
        ) {
            let limits = Limits::default();
            let mut s = DroneState::hover(Vec3::zeros(), 0.0);
            s.vx = vx; s.vz = vz; s.wz = wz;
            let n = step_dynamics(&s, &VelocityCommand::new(cx, cz, cw), &limits, 0.1);
            let eps = 1e-12;
            prop_assert!((n.vx - vx).abs() <= limits.ax_max * 0.1 + eps);
            prop_assert!((n.vz - vz).abs() <= limits.az_max * 0.1 + eps);
            prop_assert!((n.wz - wz).abs() <= limits.alpha_z_max * 0.1 + eps);
        }
    }
}
