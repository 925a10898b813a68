//! Writes a custom scenario to TOML, loads it back and flies it.

use dwa3d::dwa::Pose;
use dwa3d::geometry::{Aabb, Vec3};
use dwa3d::scenario::{ScenarioSpec, SCENARIO_SCHEMA_VERSION};
use dwa3d::sim::{run_flight, Avoidance, FlightConfig, Motion, Primitive, Shape};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ScenarioSpec {
        schema_version: SCENARIO_SCHEMA_VERSION,
        name: "two_pillars".into(),
        bounds: Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(6.0, 6.0, 2.5)),
        start: Pose {
            x: 1.0,
            y: 3.0,
            z: 0.7,
            yaw: 0.0,
        },
        goal: Vec3::new(5.0, 3.0, 0.7),
        goal_tolerance: 0.3,
        overrides: Default::default(),
        primitives: vec![
            Primitive::new(
                Shape::Cylinder {
                    radius: 0.25,
                    height: 2.0,
                },
                Vec3::new(2.5, 3.1, 0.0),
            )
            .with_label("pillar"),
            Primitive::new(
                Shape::Box {
                    size: Vec3::new(0.4, 0.4, 1.0),
                },
                Vec3::new(4.0, 1.0, 0.0),
            )
            .with_label("crate")
            .with_motion(Motion {
                velocity: Vec3::new(0.0, 0.2, 0.0),
                start_time: 2.0,
                duration: Some(5.0),
            }),
        ],
    };

    let dir = std::env::temp_dir().join("dwa3d-custom-scenario");
    std::fs::create_dir_all(&dir)?;
    let file = dir.join("two_pillars.toml");
    spec.save(&file)?;
    println!("wrote {}:\n{}", file.display(), spec.to_toml());

    let loaded = ScenarioSpec::load(&file)?;
    assert_eq!(loaded, spec);
    let cfg = FlightConfig::for_scenario(&loaded, None, Avoidance::Lateral);
    let log = run_flight(&loaded, &cfg, 7)?;
    println!(
        "{:?} after {:.1} s, min clearance {:.3} m",
        log.outcome(),
        log.summary.flight_time,
        log.summary.min_clearance
    );
    Ok(())
}
