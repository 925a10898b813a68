use super::{BeamParams, Limits, ObjectiveWeights};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

const SUM_TOLERANCE: f64 = 1e-9;

/// One inequality `lhs > rhs` (or `|lhs - rhs| <= tol` for equalities).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub description: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Positive when satisfied.
    pub margin: f64,
    pub passed: bool,
}

impl ConstraintCheck {
    fn greater(name: &str, description: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
            lhs,
            rhs,
            margin: lhs - rhs,
            passed: lhs > rhs,
        }
    }

    fn equal(name: &str, description: &str, lhs: f64, rhs: f64) -> Self {
        let err = (lhs - rhs).abs();
        Self {
            name: name.into(),
            description: description.into(),
            lhs,
            rhs,
            margin: SUM_TOLERANCE - err,
            passed: err <= SUM_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub checks: Vec<ConstraintCheck>,
}

impl WeightReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConstraintCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for WeightReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<6} {:<28} {:>10.6} vs {:>10.6}  margin {:+.6}  ({})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.lhs,
                c.rhs,
                c.margin,
                c.description
            )?;
        }
        Ok(())
    }
}

/// Checks the objective weights against the tuning constraints.
pub fn validate_weights(w: &ObjectiveWeights, limits: &Limits, beam: &BeamParams, horizon: f64) -> WeightReport {
    let mut checks = vec![
        ConstraintCheck::equal(
            "weights_sum",
            "alpha + beta + gamma = 1",
            w.alpha + w.beta + w.gamma,
            1.0,
        ),
        ConstraintCheck::equal("heading_sum", "k_psi + k_z = 1", w.k_psi + w.k_z, 1.0),
    ];
    let in_unit = [w.alpha, w.beta, w.gamma, w.k_psi, w.k_z]
        .iter()
        .all(|v| (0.0..=1.0).contains(v));
    checks.push(ConstraintCheck {
        name: "unit_range".into(),
        description: "every weight in [0, 1]".into(),
        lhs: f64::from(u8::from(in_unit)),
        rhs: 1.0,
        margin: if in_unit { 0.0 } else { -1.0 },
        passed: in_unit,
    });
    checks.push(ConstraintCheck::greater(
        "beta_over_alpha",
        "beta > alpha: clearance outweighs heading",
        w.beta,
        w.alpha,
    ));
    checks.push(ConstraintCheck::greater(
        "shortest_lateral_ray",
        "beta * lambda_psi > alpha * wz_max * dt / pi",
        w.beta * beam.lambda_psi,
        w.alpha * limits.wz_max * horizon / PI,
    ));
    checks.push(ConstraintCheck::greater(
        "beta_over_gamma",
        "beta > gamma: clearance outweighs speed",
        w.beta,
        w.gamma,
    ));
    checks.push(ConstraintCheck::greater(
        "heading_over_speed",
        "alpha * max(k_z, k_psi) > gamma",
        w.alpha * w.k_z.max(w.k_psi),
        w.gamma,
    ));
    WeightReport { checks }
}

/// Beam geometry report. `hard` problems make the beam unusable; `restrictions`
/// are the recommended envelope margins and only warn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamReport {
    pub hard: Vec<String>,
    pub restrictions: Vec<ConstraintCheck>,
}

impl BeamReport {
    pub fn usable(&self) -> bool {
        self.hard.is_empty()
    }

    pub fn within_restrictions(&self) -> bool {
        self.restrictions.iter().all(|c| c.passed)
    }
}

pub fn validate_beam(beam: &BeamParams) -> BeamReport {
    let mut hard = Vec::new();
    for (name, v) in [
        ("r_search", beam.r_search),
        ("d_psi", beam.d_psi),
        ("d_theta", beam.d_theta),
        ("r_drone", beam.r_drone),
        ("h_drone", beam.h_drone),
    ] {
        if !(v.is_finite() && v > 0.0) {
            hard.push(format!("{name} must be positive and finite, got {v}"));
        }
    }
    for (name, v) in [("psi_max", beam.psi_max), ("theta_max", beam.theta_max)] {
        if !(v.is_finite() && v >= 0.0) {
            hard.push(format!("{name} must be non-negative and finite, got {v}"));
        }
    }
    for (name, v) in [("lambda_psi", beam.lambda_psi), ("lambda_theta", beam.lambda_theta)] {
        if !(0.0..=1.0).contains(&v) {
            hard.push(format!("{name} must lie in [0, 1], got {v}"));
        }
    }
    if beam.r_search <= beam.r_drone {
        hard.push(format!(
            "r_search ({}) must exceed r_drone ({})",
            beam.r_search, beam.r_drone
        ));
    }
    let restrictions = vec![
        ConstraintCheck::greater(
            "lateral_ray_clears_radius",
            "r_search * (1 - lambda_psi) > r_drone",
            beam.r_search * (1.0 - beam.lambda_psi),
            beam.r_drone,
        ),
        ConstraintCheck::greater(
            "vertical_ray_clears_height",
            "r_search * (1 - lambda_theta) > h_drone",
            beam.r_search * (1.0 - beam.lambda_theta),
            beam.h_drone,
        ),
    ];
    BeamReport { hard, restrictions }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(w: ObjectiveWeights) -> WeightReport {
        validate_weights(&w, &Limits::default(), &BeamParams::default(), 1.0)
    }

    #[test]
    fn recommended_values_pass() {
        let r = report(ObjectiveWeights::lateral());
        assert!(r.passed(), "{r}");
        let ray = r.get("shortest_lateral_ray").unwrap();
        assert!((ray.lhs - 0.30).abs() < 1e-12);
        assert!((ray.rhs - 0.075).abs() < 1e-12);
        let h = r.get("heading_over_speed").unwrap();
        assert!((h.lhs - 0.24).abs() < 1e-12);
        assert!(report(ObjectiveWeights::vertical()).passed());
    }

    #[test]
    fn alpha_above_beta_fails_only_that_check() {
        let r = report(ObjectiveWeights {
            alpha: 0.5,
            beta: 0.4,
            gamma: 0.1,
            ..ObjectiveWeights::lateral()
        });
        let failed: Vec<_> = r.failures().map(|c| c.name.as_str()).collect();
        assert_eq!(failed, vec!["beta_over_alpha"]);
    }

    #[test]
    fn default_beam_only_warns_about_height() {
        let r = validate_beam(&BeamParams::default());
        assert!(r.usable());
        let failed: Vec<_> = r
            .restrictions
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        assert_eq!(failed, vec!["vertical_ray_clears_height"]);
        let wide = validate_beam(&BeamParams {
            r_search: 1.5,
            ..BeamParams::default()
        });
        assert!(wide.within_restrictions());
    }
}
