//! Command-line interface: fly scenarios, check configurations, benchmark the
//! planner and export figure data.
//!
//! Exit status: 0 success, 1 failed configuration check or runtime error,
//! 2 collision, 3 timeout, 4 stall, 64 usage error.

use crate::dwa::{validate_beam, validate_weights, CandidateScore, PlannerConfig};
use crate::feasibility::{check_limits_feasible, AirframeParams};
use crate::figures::{figure_data, flight_id, write_path_csv, FigureKind};
use crate::flight_log::{percentile, FlightLog, Outcome, TimingStats};
use crate::global::PathVariant;
use crate::scenario::{builtin, ScenarioError, ScenarioSpec, BUILTIN_NAMES};
use crate::sim::{run_flight_observed, Avoidance, FlightConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "dwa3d", version, about = "3D dynamic window planner for multirotors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fly one scenario and write its log.
    Run(RunArgs),
    /// Check planner weights, beam and limits against an airframe.
    CheckConfig(CheckArgs),
    /// Fly scenarios repeatedly and tabulate planner wall time.
    Bench(BenchArgs),
    /// Convert logs into plot-ready JSON.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlannerArg {
    /// Straight line to the goal.
    Naive,
    /// RRT* ignoring the drone's size.
    Rrt,
    /// RRT* keeping the safety distance.
    RrtSize,
}

impl From<PlannerArg> for PathVariant {
    fn from(p: PlannerArg) -> Self {
        match p {
            PlannerArg::Naive => PathVariant::Naive,
            PlannerArg::Rrt => PathVariant::NotSizeAware,
            PlannerArg::RrtSize => PathVariant::SizeAware,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AvoidanceArg {
    Lateral,
    Vertical,
}

impl From<AvoidanceArg> for Avoidance {
    fn from(a: AvoidanceArg) -> Self {
        match a {
            AvoidanceArg::Lateral => Avoidance::Lateral,
            AvoidanceArg::Vertical => Avoidance::Vertical,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FlightArgs {
    /// Planner used for the global path.
    #[arg(long, value_enum, default_value = "rrt-size")]
    pub planner: PlannerArg,
    /// Preferred avoidance direction.
    #[arg(long, value_enum, default_value = "lateral")]
    pub avoidance: AvoidanceArg,
    /// Override the beam search radius in metres.
    #[arg(long)]
    pub r_search: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Built-in scenario name or scenario file.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write every candidate's score terms for each iteration.
    #[arg(long)]
    pub dump_scores: bool,
    #[command(flatten)]
    pub flight: FlightArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    /// TOML file with optional `[planner]` and `[airframe]` tables.
    pub file: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Scenarios to fly, comma separated or repeated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub scenario: Vec<String>,
    /// Flights per scenario; seeds run from 0.
    #[arg(long, default_value_t = 4)]
    pub repeat: u64,
    #[command(flatten)]
    pub flight: FlightArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Output JSON file.
    #[arg(long)]
    pub out: PathBuf,
    /// Flight logs to read.
    #[arg(required = true)]
    pub logs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    TopView,
    SideView,
    Trajectory3d,
    Velocities,
    TimingBox,
}

impl From<KindArg> for FigureKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::TopView => FigureKind::TopView,
            KindArg::SideView => FigureKind::SideView,
            KindArg::Trajectory3d => FigureKind::Trajectory3d,
            KindArg::Velocities => FigureKind::Velocities,
            KindArg::TimingBox => FigureKind::TimingBox,
        }
    }
}

/// Contents of a `check-config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfigFile {
    pub planner: PlannerConfig,
    pub airframe: AirframeParams,
}

/// Resolves a built-in name or a scenario file path.
pub fn resolve_scenario(arg: &str) -> Result<ScenarioSpec, ScenarioError> {
    if BUILTIN_NAMES.contains(&arg) {
        return builtin(arg);
    }
    let path = Path::new(arg);
    if path.is_file() {
        return ScenarioSpec::load(path);
    }
    Err(ScenarioError::Unknown { name: arg.into() })
}

fn flight_config(spec: &ScenarioSpec, args: &FlightArgs) -> FlightConfig {
    let mut cfg = FlightConfig::for_scenario(spec, Some(args.planner.into()), args.avoidance.into());
    if let Some(r) = args.r_search {
        cfg.planner.beam.r_search = r;
    }
    cfg
}

/// Parses `args` (program name first) and runs the command, writing normal
/// output to `out` and diagnostics to `err`. Returns the exit status.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::CheckConfig(a) => cmd_check(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Export(a) => cmd_export(a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            if code == EXIT_USAGE {
                let _ = writeln!(err, "run `dwa3d --help` for usage");
            }
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

fn failed(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_FAILED,
        message: message.to_string(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| failed(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| failed(format!("{}: {e}", dir.display())))
}

#[derive(Serialize)]
struct ScoreLine<'a> {
    t: f64,
    chosen: bool,
    #[serde(flatten)]
    score: &'a CandidateScore,
}

/// Flies one scenario, writing `<out>/<name>-<seed>.log` and the global path
/// as `<out>/<name>-<seed>.path.csv`.
fn fly(
    spec: &ScenarioSpec,
    cfg: &FlightConfig,
    seed: u64,
    dir: &Path,
    scores: Option<&mut dyn Write>,
) -> Result<(FlightLog, PathBuf), Failure> {
    let stem = format!("{}-{seed}", spec.name);
    let mut dump_error: Option<std::io::Error> = None;
    let log = match scores {
        Some(w) => run_flight_observed(spec, cfg, seed, |t, outcome| {
            if dump_error.is_some() {
                return;
            }
            for (i, score) in outcome.scores.iter().enumerate() {
                let line = ScoreLine {
                    t,
                    chosen: outcome.chosen == Some(i),
                    score,
                };
                let res = serde_json::to_writer(&mut *w, &line)
                    .map_err(std::io::Error::other)
                    .and_then(|_| w.write_all(b"\n"));
                if let Err(e) = res {
                    dump_error = Some(e);
                    return;
                }
            }
        }),
        None => run_flight_observed(spec, cfg, seed, |_, _| {}),
    }
    .map_err(failed)?;
    if let Some(e) = dump_error {
        return Err(failed(format!("score dump: {e}")));
    }
    let log_path = dir.join(format!("{stem}.log"));
    log.write(&log_path)
        .map_err(|e| failed(format!("{}: {e}", log_path.display())))?;
    let csv = dir.join(format!("{stem}.path.csv"));
    write_path_csv(&log.header.path, create(&csv)?).map_err(|e| failed(format!("{}: {e}", csv.display())))?;
    Ok((log, log_path))
}

fn summary_line(log: &FlightLog) -> String {
    let s = &log.summary;
    format!(
        "{}: {} after {:.1} s, path {:.2} m, min clearance {:.3} m, plan ms mean {:.1} median {:.1} p95 {:.1} max {:.1}{}",
        flight_id(log),
        s.outcome,
        s.flight_time,
        s.path_length,
        s.min_clearance,
        s.plan_ms.mean,
        s.plan_ms.median,
        s.plan_ms.p95,
        s.plan_ms.max,
        if log.header.path_fallback { " (global planner failed, straight line used)" } else { "" }
    )
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let spec = resolve_scenario(&a.scenario).map_err(usage)?;
    let cfg = flight_config(&spec, &a.flight);
    ensure_dir(&a.flight.out)?;
    let log = if a.dump_scores {
        let path = a.flight.out.join(format!("{}-{}.scores.jsonl", spec.name, a.seed));
        let mut w = create(&path)?;
        let log = fly(&spec, &cfg, a.seed, &a.flight.out, Some(&mut w))?.0;
        w.flush().map_err(|e| failed(format!("{}: {e}", path.display())))?;
        log
    } else {
        fly(&spec, &cfg, a.seed, &a.flight.out, None)?.0
    };
    let _ = writeln!(out, "{}", summary_line(&log));
    Ok(log.outcome().exit_code())
}

fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let text = std::fs::read_to_string(&a.file).map_err(|e| usage(format!("{}: {e}", a.file.display())))?;
    let file: CheckConfigFile = toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", a.file.display())))?;
    let p = &file.planner;
    let mut ok = true;

    let weights = validate_weights(&p.weights, &p.limits, &p.beam, p.horizon);
    ok &= weights.passed();
    let _ = writeln!(out, "weights:\n{weights}");

    let beam = validate_beam(&p.beam);
    let _ = writeln!(out, "beam:");
    for h in &beam.hard {
        let _ = writeln!(out, "FAIL   {h}");
    }
    for c in &beam.restrictions {
        let mark = if c.passed { "PASS" } else { "WARN" };
        let _ = writeln!(
            out,
            "{mark:<6} {:<28} {:>10.6} vs {:>10.6}  ({})",
            c.name, c.lhs, c.rhs, c.description
        );
    }
    ok &= beam.usable();

    let _ = writeln!(out, "\nlimits:");
    match p.limits.validate() {
        Ok(()) => {
            let _ = writeln!(out, "PASS   limits are positive and finite");
        }
        Err(e) => {
            ok = false;
            let _ = writeln!(out, "FAIL   {e}");
        }
    }

    let _ = writeln!(out, "\nfeasibility:");
    match check_limits_feasible(&p.limits, &file.airframe) {
        Ok(r) => {
            ok &= r.feasible();
            let _ = writeln!(out, "{r}");
        }
        Err(e) => {
            ok = false;
            let _ = writeln!(out, "FAIL   {e}");
        }
    }
    let _ = writeln!(out, "\nresult: {}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

/// Pooled statistics also report quartiles.
fn quartiles(samples: &[f64]) -> [f64; 3] {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return [0.0; 3];
    }
    [percentile(&v, 0.25), percentile(&v, 0.5), percentile(&v, 0.75)]
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    if a.repeat == 0 {
        return Err(usage("--repeat must be at least 1"));
    }
    let specs = a
        .scenario
        .iter()
        .map(|s| resolve_scenario(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;
    ensure_dir(&a.flight.out)?;
    let csv_path = a.flight.out.join("bench-summary.csv");
    let mut csv = create(&csv_path)?;
    let io = |e: std::io::Error| failed(format!("{}: {e}", csv_path.display()));
    writeln!(csv, "flight,mean_ms,median_ms,p95_ms,max_ms").map_err(io)?;
    let mut worst = Outcome::Success;
    let mut all: Vec<f64> = Vec::new();
    for spec in &specs {
        let cfg = flight_config(spec, &a.flight);
        let mut pooled: Vec<f64> = Vec::new();
        for seed in 0..a.repeat {
            let (log, _) = fly(spec, &cfg, seed, &a.flight.out, None)?;
            let s = log.summary.plan_ms;
            writeln!(csv, "{},{},{},{},{}", flight_id(&log), s.mean, s.median, s.p95, s.max).map_err(io)?;
            let _ = writeln!(out, "{}", summary_line(&log));
            if worst == Outcome::Success {
                worst = log.outcome();
            }
            pooled.extend(log.records.iter().map(|r| r.plan_ms));
        }
        write_pooled(&mut csv, out, &format!("{}-all", spec.name), &pooled).map_err(io)?;
        all.extend(pooled);
    }
    if specs.len() > 1 {
        write_pooled(&mut csv, out, "all", &all).map_err(io)?;
    }
    csv.flush().map_err(io)?;
    let _ = writeln!(out, "wrote {}", csv_path.display());
    Ok(worst.exit_code())
}

fn write_pooled(csv: &mut dyn Write, out: &mut dyn Write, id: &str, samples: &[f64]) -> std::io::Result<()> {
    let s = TimingStats::from_samples(samples);
    let q = quartiles(samples);
    writeln!(csv, "{id},{},{},{},{}", s.mean, s.median, s.p95, s.max)?;
    let _ = writeln!(
        out,
        "{id}: {} samples, plan ms q1 {:.1} median {:.1} q3 {:.1} p95 {:.1} max {:.1}",
        samples.len(),
        q[0],
        q[1],
        q[2],
        s.p95,
        s.max
    );
    Ok(())
}

fn cmd_export(a: &ExportArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let logs = a
        .logs
        .iter()
        .map(|p| FlightLog::read(p).map_err(|e| failed(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    let data = figure_data(a.kind.into(), &logs).map_err(failed)?;
    let mut w = create(&a.out)?;
    serde_json::to_writer(&mut w, &data)
        .map_err(std::io::Error::other)
        .and_then(|_| w.flush())
        .map_err(|e| failed(format!("{}: {e}", a.out.display())))?;
    let _ = writeln!(out, "wrote {} series to {}", data.series.len(), a.out.display());
    Ok(EXIT_OK)
}
