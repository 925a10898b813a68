use super::{DroneState, Limits, Steps, VelocityCommand};
use serde::{Deserialize, Serialize};

/// Reachable velocity grid, ordered by `vx`, then `vz`, then `ωz` ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub candidates: Vec<VelocityCommand>,
    pub steps: Steps,
    pub vx: Vec<f64>,
    pub vz: Vec<f64>,
    pub wz: Vec<f64>,
}

/// Samples `[lo, hi]` at `step`, always including both endpoints.
pub fn axis_samples(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    debug_assert!(step > 0.0);
    if hi <= lo {
        return vec![lo];
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut out: Vec<f64> = (0..=n)
        .map(|k| if k == 0 { lo } else { snap(lo + k as f64 * step, step) })
        .collect();
    let last = *out.last().unwrap_or(&lo);
    if hi - last > 1e-9 {
        out.push(hi);
    } else if let Some(v) = out.last_mut() {
        // Snap rounding residue so the upper endpoint is exact.
        *v = hi;
    }
    out
}

/// Removes accumulation residue from values that sit on the `step` lattice,
/// so that e.g. zero velocity is exactly zero.
fn snap(v: f64, step: f64) -> f64 {
    let q = (v / step).round();
    if (v - q * step).abs() <= 1e-9 * step {
        q * step
    } else {
        v
    }
}

fn window(current: f64, accel: f64, dt: f64, lo: f64, hi: f64) -> (f64, f64) {
    let c = current.clamp(lo, hi);
    (
        (current - accel * dt).max(lo).min(c),
        (current + accel * dt).min(hi).max(c),
    )
}

/// Intersection of the static velocity bounds with the window reachable
/// within `dt` under the acceleration limits.
pub fn build_search_space(s: &DroneState, limits: &Limits, steps: &Steps, dt: f64) -> SearchSpace {
    let (x0, x1) = window(s.vx, limits.ax_max, dt, 0.0, limits.vx_max);
    let (z0, z1) = window(s.vz, limits.az_max, dt, -limits.vz_max, limits.vz_max);
    let (w0, w1) = window(s.wz, limits.alpha_z_max, dt, -limits.wz_max, limits.wz_max);
    let vx = axis_samples(x0, x1, steps.vx);
    let vz = axis_samples(z0, z1, steps.vz);
    let wz = axis_samples(w0, w1, steps.wz);
    let mut candidates = Vec::with_capacity(vx.len() * vz.len() * wz.len());
    for &a in &vx {
        for &b in &vz {
            for &c in &wz {
                candidates.push(VelocityCommand::new(a, b, c));
            }
        }
    }
    SearchSpace {
        candidates,
        steps: *steps,
        vx,
        vz,
        wz,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn hover_window_covers_static_bounds() {
        let s = DroneState::hover(Vec3::zeros(), 0.0);
        let space = build_search_space(&s, &Limits::default(), &Steps::default(), 1.0);
        assert_eq!(space.vx.len(), 7);
        assert_relative_eq!(space.vx[0], 0.0);
        assert_relative_eq!(*space.vx.last().unwrap(), 0.3);
        assert_eq!(space.vz.len(), 13);
        assert_eq!(space.wz.len(), 37);
        assert_eq!(space.candidates.len(), 7 * 13 * 37);
    }

    #[test]
    fn full_speed_keeps_full_range() {
        let mut s = DroneState::hover(Vec3::zeros(), 0.0);
        s.vx = 0.3;
        let space = build_search_space(&s, &Limits::default(), &Steps::default(), 1.0);
        assert_relative_eq!(space.vx[0], 0.0);
        assert_relative_eq!(*space.vx.last().unwrap(), 0.3);
    }

    #[test]
    fn vanishing_window_is_the_current_velocity() {
        let mut s = DroneState::hover(Vec3::zeros(), 0.0);
        s.vx = 0.2;
        s.vz = -0.1;
        s.wz = 0.3;
        let space = build_search_space(&s, &Limits::default(), &Steps::default(), 0.0);
        assert_eq!(space.candidates, vec![VelocityCommand::new(0.2, -0.1, 0.3)]);
    }

    proptest! {
        #[test]
        fn candidates_lie_in_both_windows(
            vx in 0.0f64..0.3, vz in -0.3f64..0.3, wz in -0.7f64..0.7, dt in 0.01f64..2.0,
        ) {
            let limits = Limits::default();
            let mut s = DroneState::hover(Vec3::zeros(), 0.0);
            s.vx = vx; s.vz = vz; s.wz = wz;
            let space = build_search_space(&s, &limits, &Steps::default(), dt);
            prop_assert!(!space.candidates.is_empty());
            let eps = 1e-9;
            for c in &space.candidates {
                prop_assert!(c.vx >= -eps && c.vx <= limits.vx_max + eps);
                prop_assert!(c.vz.abs() <= limits.vz_max + eps);
                prop_assert!(c.wz.abs() <= limits.wz_max + eps);
                prop_assert!((c.vx - vx).abs() <= limits.ax_max * dt + eps);
                prop_assert!((c.vz - vz).abs() <= limits.az_max * dt + eps);
                prop_assert!((c.wz - wz).abs() <= limits.alpha_z_max * dt + eps);
            }
        }
    }
}
