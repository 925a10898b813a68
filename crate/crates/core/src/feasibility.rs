//! Thrust and pitch relations used to sanity-check acceleration limits
//! against what the airframe can deliver.

use crate::dwa::Limits;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FeasibilityError {
    #[error("invalid airframe: {0}")]
    InvalidAirframe(String),
    #[error("pitch {0} rad is outside (-pi/2, pi/2)")]
    PitchOutOfRange(f64),
    #[error("vertical acceleration {az} m/s^2 cancels gravity {g} m/s^2")]
    NoLift { az: f64, g: f64 },
}

/// Multirotor parameters relevant to the thrust balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AirframeParams {
    /// Mass in kg.
    pub mass: f64,
    pub rotors: u32,
    /// Gravitational acceleration in m/s^2.
    pub g: f64,
    /// Pitch limit in rad.
    pub pitch_max: f64,
    /// Maximum thrust of one motor in N.
    pub motor_thrust_max: f64,
}

impl Default for AirframeParams {
    /// A 3.65 kg hexarotor limited to 25° of pitch. Hovering at that pitch
    /// takes about 6.57 N per motor, roughly half throttle, so each motor is
    /// taken to deliver twice that at full throttle.
    fn default() -> Self {
        Self {
            mass: 3.65,
            rotors: 6,
            g: 9.8,
            pitch_max: 25f64.to_radians(),
            motor_thrust_max: 13.14,
        }
    }
}

impl AirframeParams {
    pub fn validate(&self) -> Result<(), FeasibilityError> {
        let bad = |m: &str| Err(FeasibilityError::InvalidAirframe(m.into()));
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return bad("mass must be positive");
        }
        if self.rotors == 0 {
            return bad("rotor count must be positive");
        }
        if !(self.g.is_finite() && self.g > 0.0) {
            return bad("g must be positive");
        }
        if !(self.pitch_max > 0.0 && self.pitch_max < std::f64::consts::FRAC_PI_2) {
            return bad("pitch_max must lie in (0, pi/2)");
        }
        if !(self.motor_thrust_max.is_finite() && self.motor_thrust_max > 0.0) {
            return bad("motor_thrust_max must be positive");
        }
        Ok(())
    }

    fn n(&self) -> f64 {
        f64::from(self.rotors)
    }
}

fn check_pitch(theta: f64) -> Result<f64, FeasibilityError> {
    let c = theta.cos();
    if theta.is_finite() && theta.abs() < std::f64::consts::FRAC_PI_2 && c > 0.0 {
        Ok(c)
    } else {
        Err(FeasibilityError::PitchOutOfRange(theta))
    }
}

/// Per-motor thrust that holds altitude while pitched by `theta`.
pub fn hover_thrust_per_motor(a: &AirframeParams, theta: f64) -> Result<f64, FeasibilityError> {
    a.validate()?;
    let c = check_pitch(theta)?;
    Ok(a.g * a.mass / (a.n() * c))
}

/// Per-motor thrust that produces vertical acceleration `az` at pitch `theta`.
pub fn thrust_for_vertical_accel(a: &AirframeParams, theta: f64, az: f64) -> Result<f64, FeasibilityError> {
    a.validate()?;
    let c = check_pitch(theta)?;
    Ok(a.mass * (a.g + az) / (a.n() * c))
}

/// Horizontal acceleration from pitching by `theta` with each motor producing
/// `thrust` (no roll, no drag).
pub fn max_forward_accel(a: &AirframeParams, theta: f64, thrust: f64) -> Result<f64, FeasibilityError> {
    a.validate()?;
    check_pitch(theta)?;
    Ok(a.n() * thrust * theta.sin() / a.mass)
}

/// Pitch at which the thrust vector yields accelerations `ax` and `az`.
pub fn pitch_for_accel(ax: f64, az: f64, g: f64) -> Result<f64, FeasibilityError> {
    // Also rejects NaN.
    if (az + g).partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(FeasibilityError::NoLift { az, g });
    }
    Ok(ax.atan2(az + g))
}

/// Outcome of checking a set of acceleration limits against an airframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Forward acceleration available at the pitch limit with hover thrust.
    pub ax_available: f64,
    pub ax_required: f64,
    /// Pitch needed for the combined limit accelerations.
    pub pitch_required: f64,
    /// Per-motor thrust needed at that pitch.
    pub thrust_required: f64,
    pub thrust_max: f64,
}

impl FeasibilityReport {
    pub fn accel_margin(&self) -> f64 {
        self.ax_available - self.ax_required
    }

    pub fn thrust_margin(&self) -> f64 {
        self.thrust_max - self.thrust_required
    }

    pub fn feasible(&self) -> bool {
        self.accel_margin() >= 0.0 && self.thrust_margin() >= 0.0
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        writeln!(
            f,
            "forward accel: need {:.3} m/s^2, available {:.3} m/s^2 (margin {:+.3}) {}",
            self.ax_required,
            self.ax_available,
            self.accel_margin(),
            mark(self.accel_margin() >= 0.0)
        )?;
        write!(
            f,
            "motor thrust: need {:.3} N at {:.2} deg pitch, max {:.3} N (margin {:+.3}) {}",
            self.thrust_required,
            self.pitch_required.to_degrees(),
            self.thrust_max,
            self.thrust_margin(),
            mark(self.thrust_margin() >= 0.0)
        )
    }
}

/// Checks that `limits.ax_max` is reachable within the pitch limit and that
/// the thrust needed for `ax_max` and `az_max` together stays within the motors' range.
pub fn check_limits_feasible(limits: &Limits, a: &AirframeParams) -> Result<FeasibilityReport, FeasibilityError> {
    a.validate()?;
    let hover = hover_thrust_per_motor(a, a.pitch_max)?;
    let ax_available = max_forward_accel(a, a.pitch_max, hover)?;
    let pitch_required = pitch_for_accel(limits.ax_max, limits.az_max, a.g)?;
    let thrust_required = thrust_for_vertical_accel(a, pitch_required, limits.az_max)?;
    Ok(FeasibilityReport {
        ax_available,
        ax_required: limits.ax_max,
        pitch_required,
        thrust_required,
        thrust_max: a.motor_thrust_max,
    })
}
