//! Flight logs survive the file round trip, and every figure kind can be
//! extracted from logs read back from disk.

use dwa3d::figures::{figure_data, FigureKind, Role};
use dwa3d::flight_log::{read_from, read_partial, FlightLog, Outcome};
use dwa3d::global::PathVariant;
use dwa3d::scenario::load_scenario;
use dwa3d::sim::{run_flight, Avoidance, FlightConfig};
use std::io::BufReader;

const SCENARIO: &str = r#"
schema_version = 1
name = "pillar"
start = { x = 0.6, y = 1.5, z = 0.7, yaw = 0.0 }
goal = [2.6, 1.5, 0.7]

[bounds]
min = [0.0, 0.0, 0.0]
max = [3.2, 3.0, 1.6]

[[primitives]]
label = "pillar"
position = [1.6, 1.7, 0.0]
shape = { kind = "cylinder", radius = 0.15, height = 1.5 }
"#;

fn flown() -> FlightLog {
    let spec = load_scenario(SCENARIO).unwrap();
    let cfg = FlightConfig::for_scenario(&spec, Some(PathVariant::Naive), Avoidance::Lateral);
    run_flight(&spec, &cfg, 11).unwrap()
}

#[test]
fn log_file_round_trip_is_exact() {
    let log = flown();
    assert_eq!(log.outcome(), Outcome::Success);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pillar-11.log");
    log.write(&path).unwrap();
    let back = FlightLog::read(&path).unwrap();
    assert!(back == log, "log changed on the way through the file");
    assert_eq!(back.summary.iterations, back.records.len());
}

#[test]
fn truncated_log_keeps_complete_records() {
    let log = flown();
    let mut bytes = Vec::new();
    log.write_to(&mut bytes).unwrap();
    let cut = bytes.len() * 2 / 3;
    let partial = read_partial(BufReader::new(&bytes[..cut])).unwrap();
    assert!(partial.summary.is_none());
    assert!(!partial.records.is_empty());
    assert_eq!(partial.records[..], log.records[..partial.records.len()]);
    assert!(read_from(BufReader::new(&bytes[..cut])).is_err());
}

#[test]
fn every_figure_kind_extracts_and_is_stable() {
    let log = flown();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pillar-11.log");
    log.write(&path).unwrap();
    for kind in FigureKind::ALL {
        let first = serde_json::to_vec(&figure_data(kind, &[FlightLog::read(&path).unwrap()]).unwrap()).unwrap();
        let second = serde_json::to_vec(&figure_data(kind, &[FlightLog::read(&path).unwrap()]).unwrap()).unwrap();
        assert_eq!(first, second, "{kind:?} output is not stable");
    }

    let n = log.records.len();
    let velocities = figure_data(FigureKind::Velocities, std::slice::from_ref(&log)).unwrap();
    assert_eq!(velocities.series.len(), 6);
    assert!(velocities.series.iter().all(|s| s.x.len() == n && s.y.len() == n));
    assert_eq!(
        velocities.series.iter().filter(|s| s.role == Role::Commanded).count(),
        3
    );

    let timing = figure_data(FigureKind::TimingBox, std::slice::from_ref(&log)).unwrap();
    assert_eq!(timing.series[0].y.len(), n);

    let top = figure_data(FigureKind::TopView, std::slice::from_ref(&log)).unwrap();
    let trajectory = top.series.iter().find(|s| s.role == Role::Trajectory).unwrap();
    assert_eq!(trajectory.x.len(), n + 1, "start pose plus one point per record");
    assert_eq!(top.obstacles.len(), 1);
    let three_d = figure_data(FigureKind::Trajectory3d, std::slice::from_ref(&log)).unwrap();
    assert!(three_d
        .series
        .iter()
        .all(|s| s.z.as_ref().is_some_and(|z| z.len() == s.x.len())));
}
