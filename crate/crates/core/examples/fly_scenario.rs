//! Flies a built-in scenario and prints the flight summary.
//!
//! Usage: `cargo run --example fly_scenario -- [scenario] [naive|rrt|rrt-size] [lateral|vertical] [seed]`

use dwa3d::global::PathVariant;
use dwa3d::scenario::{builtin, BUILTIN_NAMES};
use dwa3d::sim::{run_flight, Avoidance, FlightConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map_or("zigzag", String::as_str);
    let variant = match args.get(1).map(String::as_str) {
        Some("naive") => Some(PathVariant::Naive),
        Some("rrt") => Some(PathVariant::NotSizeAware),
        Some("rrt-size") | None => None,
        Some(other) => return Err(format!("unknown planner `{other}`").into()),
    };
    let avoidance = match args.get(2).map(String::as_str) {
        Some("vertical") => Avoidance::Vertical,
        _ => Avoidance::Lateral,
    };
    let seed = args.get(3).map(|s| s.parse()).transpose()?.unwrap_or(0);

    let spec = builtin(name).map_err(|e| format!("{e} (choose from {})", BUILTIN_NAMES.join(", ")))?;
    let cfg = FlightConfig::for_scenario(&spec, variant, avoidance);
    let log = run_flight(&spec, &cfg, seed)?;
    let s = &log.summary;
    println!(
        "{name} ({:?}, {avoidance:?}, seed {seed}): {:?}",
        cfg.variant, s.outcome
    );
    println!(
        "  {} iterations, {:.1} s, path {:.2} m, min clearance {:.3} m",
        s.iterations, s.flight_time, s.path_length, s.min_clearance
    );
    println!(
        "  plan time mean {:.1} ms, median {:.1} ms, p95 {:.1} ms, max {:.1} ms",
        s.plan_ms.mean, s.plan_ms.median, s.plan_ms.p95, s.plan_ms.max
    );
    if s.max_map_lag_cycles > 0 {
        println!(
            "  moving obstacle left stale voxels for up to {} cycles",
            s.max_map_lag_cycles
        );
    }
    std::process::exit(s.outcome.exit_code());
}
