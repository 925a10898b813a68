//! Flies the wall scenario along the straight-line path with both heading
//! weightings: lateral preference turns around the wall, vertical preference
//! climbs over it.

use dwa3d::global::PathVariant;
use dwa3d::scenario::{builtin, WALL_HEIGHT};
use dwa3d::sim::{run_flight, Avoidance, FlightConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = builtin("wall")?;
    for avoidance in [Avoidance::Lateral, Avoidance::Vertical] {
        let cfg = FlightConfig::for_scenario(&spec, Some(PathVariant::Naive), avoidance);
        let w = cfg.planner.weights;
        let log = run_flight(&spec, &cfg, 0)?;
        let climb = log.positions().map(|p| p[2] - spec.start.z).fold(f64::MIN, f64::max);
        let side = log.positions().map(|p| (p[1] - spec.start.y).abs()).fold(0.0, f64::max);
        println!(
            "{avoidance:?} (k_psi {}, k_z {}): {:?}, max climb {:.2} m, max lateral offset {:.2} m, wall top {WALL_HEIGHT} m",
            w.k_psi,
            w.k_z,
            log.outcome(),
            climb,
            side
        );
    }
    Ok(())
}
