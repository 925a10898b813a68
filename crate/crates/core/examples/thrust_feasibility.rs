//! Checks acceleration limits against the airframe's thrust and pitch range.

use dwa3d::dwa::Limits;
use dwa3d::feasibility::{
    check_limits_feasible, hover_thrust_per_motor, max_forward_accel, pitch_for_accel, AirframeParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = AirframeParams::default();
    let hover = hover_thrust_per_motor(&a, a.pitch_max)?;
    println!(
        "{} kg, {} rotors: hover at {:.0} deg pitch needs {:.3} N per motor",
        a.mass,
        a.rotors,
        a.pitch_max.to_degrees(),
        hover
    );
    println!(
        "forward acceleration at that pitch and thrust: {:.3} m/s^2",
        max_forward_accel(&a, a.pitch_max, hover)?
    );
    println!(
        "pitch for 1 m/s^2 forward and 1 m/s^2 up: {:.2} deg",
        pitch_for_accel(1.0, 1.0, 9.81)?.to_degrees()
    );

    for (name, limits) in [
        ("defaults", Limits::default()),
        (
            "aggressive",
            Limits {
                ax_max: 6.0,
                az_max: 3.0,
                ..Limits::default()
            },
        ),
    ] {
        let report = check_limits_feasible(&limits, &a)?;
        println!(
            "\n{name}: {}\n{report}",
            if report.feasible() { "feasible" } else { "infeasible" }
        );
    }
    Ok(())
}
