//! Writes a flight log, reads it back and extracts the data behind every
//! figure kind as JSON, plus the global path as CSV.

use dwa3d::figures::{figure_data, write_path_csv, FigureKind};
use dwa3d::flight_log::FlightLog;
use dwa3d::scenario::builtin;
use dwa3d::sim::{run_flight, Avoidance, FlightConfig};
use std::fs::File;
use std::io::BufWriter;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("dwa3d-figures");
    std::fs::create_dir_all(&dir)?;

    let spec = builtin("zigzag")?;
    let cfg = FlightConfig::for_scenario(&spec, None, Avoidance::Lateral);
    let log = run_flight(&spec, &cfg, 1)?;
    let log_path = dir.join("zigzag-1.log");
    log.write(&log_path)?;
    let back = FlightLog::read(&log_path)?;
    assert!(back == log);
    println!(
        "{}: {} records, {:?}",
        log_path.display(),
        back.records.len(),
        back.outcome()
    );

    let csv = dir.join("zigzag-1.path.csv");
    write_path_csv(&back.header.path, BufWriter::new(File::create(&csv)?))?;
    println!("{}: {} waypoints", csv.display(), back.header.path.len());

    for kind in FigureKind::ALL {
        let data = figure_data(kind, std::slice::from_ref(&back))?;
        let out = dir.join(format!(
            "{}.json",
            serde_json::to_value(kind)?.as_str().unwrap_or("figure")
        ));
        serde_json::to_writer(BufWriter::new(File::create(&out)?), &data)?;
        println!(
            "{kind:?}: {} series, {} obstacle outlines -> {}",
            data.series.len(),
            data.obstacles.len(),
            out.display()
        );
    }
    Ok(())
}
