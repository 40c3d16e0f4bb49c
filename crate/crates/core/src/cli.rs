//! The `dnes` command line.
//!
//! ```text
//! dnes analyze|simulate|sweep <file> [--out DIR] [--set key=value]...
//! ```
//!
//! Each command writes `<name>.report.toml` into the output directory;
//! `simulate` adds `<name>.csv` and `sweep` adds `<name>.sweep.csv` plus one
//! trajectory per run under `<name>-sweep/`. Exit codes: 0 ok, 1 i/o,
//! 2 scenario error, 3 unmet precondition, 4 instability. `DNES_THREADS`
//! bounds the number of concurrent sweep runs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{analyze, Report};
use crate::scenario::Scenario;
use crate::sim::Trajectory;

#[derive(Debug, Parser)]
#[command(name = "dnes", version, about = "Nash equilibrium seeking with deceptive players")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the analysis report.
    Analyze(CommonArgs),
    /// Integrate the extremum-seeking dynamics and write the trajectory.
    Simulate(CommonArgs),
    /// Run one simulation per value of the scenario's `[sweep]` parameter.
    Sweep(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario file, or the name of a bundled scenario.
    pub file: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Override a scenario value, e.g. `--set probe.a=0.1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

/// Steady-state summary of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_code: Option<String>,
    pub unstable: bool,
    pub t_end: f64,
    pub samples: usize,
    /// Means over the last common probe period.
    pub x_mean: Vec<f64>,
    pub delta_mean: Vec<f64>,
    pub cost_mean: Vec<f64>,
}

impl RunSummary {
    pub fn of(tr: &Trajectory) -> RunSummary {
        let n = tr.players();
        let m = tr.deceivers().len();
        let avg = tr.final_average().unwrap_or_else(|| tr.row(tr.len() - 1).to_vec());
        let unstable = tr.is_unstable();
        RunSummary {
            status: if unstable { "error".into() } else { "ok".into() },
            error_code: unstable.then(|| "instability".to_string()),
            unstable,
            t_end: *tr.t().last().unwrap_or(&0.0),
            samples: tr.len(),
            x_mean: avg[..n].to_vec(),
            delta_mean: avg[2 * n..2 * n + m].to_vec(),
            cost_mean: avg[2 * n + m..].to_vec(),
        }
    }

    fn failed(e: &Error) -> RunSummary {
        RunSummary {
            status: "error".into(),
            error_code: Some(e.code().into()),
            unstable: matches!(e, Error::Diverged { .. }),
            t_end: f64::NAN,
            samples: 0,
            x_mean: vec![],
            delta_mean: vec![],
            cost_mean: vec![],
        }
    }
}

#[derive(Serialize)]
struct FailureReport<'a> {
    scenario: &'a str,
    status: &'static str,
    error_code: &'static str,
    errors: Vec<String>,
}

#[derive(Serialize)]
struct SimulationReport<'a> {
    scenario: &'a str,
    #[serde(flatten)]
    summary: &'a RunSummary,
    trajectory: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    run(&cli.command)
}

/// Runs a parsed command; returns the process exit code.
pub fn run(cmd: &Command) -> i32 {
    let (args, what) = match cmd {
        Command::Analyze(a) => (a, "analyze"),
        Command::Simulate(a) => (a, "simulate"),
        Command::Sweep(a) => (a, "sweep"),
    };
    let stem = args.file.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario").to_string();
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("error: cannot create {}: {e}", args.out.display());
        return 1;
    }
    let scn = match Scenario::load(&args.file, &args.set) {
        Ok(s) => s,
        Err(e) => return fail(&args.out, &stem, &e),
    };
    let out = match what {
        "analyze" => cmd_analyze(&scn, &args.out),
        "simulate" => cmd_simulate(&scn, &args.out),
        _ => cmd_sweep(&scn, &args.out),
    };
    match out {
        Ok(code) => code,
        Err(e) => fail(&args.out, &scn.name, &e),
    }
}

fn fail(out: &Path, name: &str, e: &Error) -> i32 {
    eprintln!("error: {e}");
    let errors = match e {
        Error::Scenario(list) => list.clone(),
        other => vec![other.to_string()],
    };
    let rep = FailureReport { scenario: name, status: "error", error_code: e.code(), errors };
    let path = out.join(format!("{name}.report.toml"));
    if let Err(w) = std::fs::write(&path, toml::to_string(&rep).expect("report serializes")) {
        eprintln!("error: {}: {w}", path.display());
    }
    e.exit_code()
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn cmd_analyze(scn: &Scenario, out: &Path) -> Result<i32> {
    let rep: Report = analyze(scn);
    let path = out.join(format!("{}.report.toml", scn.name));
    write(&path, &rep.to_toml())?;
    let mut msg = String::new();
    if let Some(g) = &rep.game {
        let _ = writeln!(msg, "Nash equilibrium: {:?}", g.nash_equilibrium);
    }
    for d in &rep.deceivers {
        let _ = writeln!(msg, "player {} stability set: {}", d.player, d.delta_set.text);
        if let Some(s) = &d.sdso {
            let _ = writeln!(msg, "player {} attainable references: {}", d.player, s.omega.text);
        }
        if let Some(r) = &d.reference {
            let _ = writeln!(msg, "player {} reaches jref = {} at delta = {:?}", d.player, d.jref, r.delta);
        }
    }
    for e in &rep.errors {
        let _ = writeln!(msg, "error: {e}");
    }
    let _ = writeln!(msg, "report written to {}", path.display());
    print!("{msg}");
    Ok(rep.exit_code())
}

fn cmd_simulate(scn: &Scenario, out: &Path) -> Result<i32> {
    let sim = scn.simulation()?;
    let tr = sim.run()?;
    let csv = out.join(format!("{}.csv", scn.name));
    tr.save_csv(&csv)?;
    let summary = RunSummary::of(&tr);
    let rep = SimulationReport { scenario: &scn.name, summary: &summary, trajectory: csv.display().to_string() };
    write(&out.join(format!("{}.report.toml", scn.name)), &toml::to_string(&rep).expect("report serializes"))?;
    println!(
        "{} samples up to t = {}; final-period mean x = {:?}, J = {:?}",
        summary.samples, summary.t_end, summary.x_mean, summary.cost_mean
    );
    if summary.unstable {
        eprintln!("error: trajectory exceeded the blow-up threshold and was truncated");
        return Ok(4);
    }
    Ok(0)
}

/// Worker count from `DNES_THREADS`, if set to a positive integer.
pub fn configured_threads() -> Option<usize> {
    std::env::var("DNES_THREADS").ok().and_then(|v| v.trim().parse().ok()).filter(|&n| n > 0)
}

/// Runs every sweep value; results keep the order of the values.
pub fn run_sweep(scn: &Scenario, traj_dir: Option<&Path>) -> Result<Vec<(f64, RunSummary)>> {
    let spec = scn
        .file
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Scenario(vec!["sweep needs a [sweep] section".into()]))?;
    let values = scn.sweep_values.clone().unwrap_or_default();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = configured_threads() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    let results: Vec<(f64, RunSummary)> = pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(k, &v)| {
                let one = || -> Result<RunSummary> {
                    let s = scn.with_override(&format!("{}={}", spec.parameter, toml::Value::Float(v)))?;
                    let tr = s.simulation()?.run()?;
                    if let Some(dir) = traj_dir {
                        tr.save_csv(&dir.join(format!("run-{:03}.csv", k + 1)))?;
                    }
                    Ok(RunSummary::of(&tr))
                };
                (v, one().unwrap_or_else(|e| RunSummary::failed(&e)))
            })
            .collect()
    });
    Ok(results)
}

fn cmd_sweep(scn: &Scenario, out: &Path) -> Result<i32> {
    let spec = scn
        .file
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Scenario(vec!["sweep needs a [sweep] section".into()]))?;
    let dir = out.join(format!("{}-sweep", scn.name));
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let results = run_sweep(scn, Some(&dir))?;
    let n = scn.model.players();
    let m = scn.deception.len();
    let mut csv = String::from("value,status,unstable");
    for i in 1..=n {
        let _ = write!(csv, ",xbar{i}");
    }
    for d in scn.deception.deceivers() {
        let _ = write!(csv, ",deltabar{}", d.player + 1);
    }
    for i in 1..=n {
        let _ = write!(csv, ",Jbar{i}");
    }
    csv.push('\n');
    let mut worst = 0;
    for (v, s) in &results {
        let _ = write!(csv, "{v:.16e},{},{}", s.error_code.as_deref().unwrap_or("ok"), s.unstable);
        let pad = |vals: &[f64], len: usize| -> String {
            (0..len).map(|i| vals.get(i).map_or(",nan".to_string(), |x| format!(",{x:.16e}"))).collect()
        };
        csv.push_str(&pad(&s.x_mean, n));
        csv.push_str(&pad(&s.delta_mean, m));
        csv.push_str(&pad(&s.cost_mean, n));
        csv.push('\n');
        if s.status != "ok" {
            worst = worst.max(if s.unstable { 4 } else { 3 });
        }
    }
    let path = out.join(format!("{}.sweep.csv", scn.name));
    write(&path, &csv)?;
    #[derive(Serialize)]
    struct SweepReport<'a> {
        scenario: &'a str,
        status: &'static str,
        parameter: &'a str,
        runs: usize,
        failed: usize,
        summary: String,
    }
    let failed = results.iter().filter(|(_, s)| s.status != "ok").count();
    let rep = SweepReport {
        scenario: &scn.name,
        status: if worst == 0 { "ok" } else { "error" },
        parameter: &spec.parameter,
        runs: results.len(),
        failed,
        summary: path.display().to_string(),
    };
    write(&out.join(format!("{}.report.toml", scn.name)), &toml::to_string(&rep).expect("report serializes"))?;
    println!("{} runs over {}, {failed} failed; summary in {}", results.len(), spec.parameter, path.display());
    Ok(worst)
}
