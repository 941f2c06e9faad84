//! Config-driven front end.
//!
//! Exit codes: 0 ok, 1 config error, 2 numerical failure, 3 assertion
//! failure (only with `--assert`).

mod config;
mod output;
mod tasks;

pub use config::{
    validate, validate_config, EstimatorSpec, ExperimentConfig, FdSteps, FuzzSpec, GridSpec,
    OutputSpec, Task, ValidatedConfig,
};
pub use output::{fmt_f64, CsvTable, VERSION};
pub use tasks::{run_task, BoundSummary, TaskOutcome};

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_ASSERT: i32 = 3;

const DEFAULT_OUT: &str = "alphageo-out";

#[derive(Debug, Parser)]
#[command(name = "alphageo", version, about = "Relative alpha-entropy geometry and Bayesian alpha-CRLB checks")]
pub struct Cli {
    /// Override the config seed (used by the fuzz task only).
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Override the Eguchi finite-difference step.
    #[arg(long = "h", global = true, value_name = "STEP")]
    pub h: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a config and print its digest.
    Validate { config: PathBuf },
    /// Run the config's tasks in order.
    Run(RunArgs),
    /// Run the bound at every order and write plot data.
    Sweep(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub config: PathBuf,
    /// Exit with status 3 if any checked invariant fails.
    #[arg(long)]
    pub assert: bool,
    /// Output directory (overrides `output.dir`).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct TaskSummary {
    task: &'static str,
    file: String,
    rows: usize,
    failures: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Summary {
    version: &'static str,
    digest: String,
    command: &'static str,
    config: ExperimentConfig,
    tasks: Vec<TaskSummary>,
    bounds: Vec<BoundSummary>,
    assertions_passed: bool,
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match &cli.command {
        Command::Validate { config } => match load(config, &cli) {
            Ok(v) => {
                println!(
                    "ok: {} ({} orders, {} tasks, {} grid nodes, digest {})",
                    config.display(),
                    v.alphas.len(),
                    v.config.tasks.len(),
                    v.grid.nodes().len(),
                    v.digest
                );
                EXIT_OK
            }
            Err(code) => code,
        },
        Command::Run(a) => run(a, &cli, false),
        Command::Sweep(a) => run(a, &cli, true),
    }
}

fn load(path: &Path, cli: &Cli) -> Result<ValidatedConfig, i32> {
    let report = |errs: Vec<Error>| {
        for e in &errs {
            eprintln!("error: {e}");
        }
        EXIT_CONFIG
    };
    let text = std::fs::read_to_string(path).map_err(|e| {
        report(vec![Error::config("", format!("cannot read {}: {e}", path.display()))])
    })?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| report(vec![e]))?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(h) = cli.h {
        cfg.fd.metric = h;
    }
    validate(cfg).map_err(report)
}

fn run(a: &RunArgs, cli: &Cli, sweep: bool) -> i32 {
    let v = match load(&a.config, cli) {
        Ok(v) => v,
        Err(code) => return code,
    };
    if sweep && v.alphas.len() < 2 {
        eprintln!("error: {}", Error::config("alphas", "sweep needs at least two orders"));
        return EXIT_CONFIG;
    }
    let dir = a
        .out
        .clone()
        .or_else(|| v.config.output.as_ref().map(|o| PathBuf::from(&o.dir)))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    let mut outcomes = Vec::new();
    if sweep {
        match tasks::bound(&v, &v.alphas) {
            Ok(o) => outcomes.push(o),
            Err(e) => return numerical(e),
        }
    } else {
        for &t in &v.config.tasks {
            log::info!("running task {}", t.name());
            match run_task(t, &v) {
                Ok(o) => outcomes.push(o),
                Err(e) => return numerical(e),
            }
        }
    }

    match write_outputs(&dir, &v, &outcomes, sweep) {
        Ok(passed) => {
            for o in &outcomes {
                let state = if o.failures.is_empty() { "ok" } else { "FAILED" };
                println!("{}: {} rows, {state}", o.task.name(), o.table.rows.len());
                for f in &o.failures {
                    println!("  {f}");
                }
            }
            println!("wrote {}", dir.display());
            if a.assert && !passed {
                EXIT_ASSERT
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn numerical(e: Error) -> i32 {
    eprintln!("error: {e}");
    EXIT_NUMERICAL
}

fn write_outputs(dir: &Path, v: &ValidatedConfig, outcomes: &[TaskOutcome], sweep: bool) -> crate::Result<bool> {
    std::fs::create_dir_all(dir)?;
    let mut tasks = Vec::new();
    let mut bounds = Vec::new();
    for o in outcomes {
        let file = if sweep { "sweep.csv".to_string() } else { format!("{}.csv", o.task.name()) };
        o.table.write(&dir.join(&file), &v.digest)?;
        tasks.push(TaskSummary {
            task: o.task.name(),
            file,
            rows: o.table.rows.len(),
            failures: o.failures.clone(),
        });
        bounds.extend(o.bounds.iter().map(BoundSummary::from));
    }
    if sweep {
        let reports: Vec<_> = outcomes.iter().flat_map(|o| o.bounds.iter().cloned()).collect();
        tasks::plotdata(&reports).write(&dir.join("plotdata.csv"), &v.digest)?;
    }
    let passed = outcomes.iter().all(|o| o.failures.is_empty());
    let summary = Summary {
        version: VERSION,
        digest: v.digest.clone(),
        command: if sweep { "sweep" } else { "run" },
        config: v.config.clone(),
        tasks,
        bounds,
        assertions_passed: passed,
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json.push('\n');
    std::fs::write(dir.join("summary.json"), json)?;
    Ok(passed)
}
