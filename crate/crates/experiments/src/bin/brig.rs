//! `brig`: rigidity analysis, decomposition, mission simulation, Monte-Carlo
//! experiments and plotting.
//!
//! Exit status: 0 on success, 1 on input or configuration errors, 2 when a
//! simulated run is terminated by a collision or rigidity violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bearing_rigidity::{Execution, DEFAULT_TOL};
use bearing_rigidity_experiments::analyze::{analyze, decomposition, load_framework};
use bearing_rigidity_experiments::config::{load, Fig1Config, Fig2Config, MissionConfig};
use bearing_rigidity_experiments::fig1::{fig1_table, run_fig1};
use bearing_rigidity_experiments::fig2::{fig2_table, run_fig2};
use bearing_rigidity_experiments::mission::{events_table, message_table, run_mission, summary, trace_table};
use bearing_rigidity_experiments::plot::plot_csv;
use bearing_rigidity_experiments::{ExperimentError, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "brig", version, about = "Subframework-based bearing rigidity for robot networks")]
struct Cli {
    /// Worker threads for Monte-Carlo sampling (1 runs sequentially).
    #[arg(long, env = "BRIG_WORKERS", global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rigidity report for a framework JSON file.
    Analyze {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Minimal radii, memberships and emission radii of a framework.
    Decompose {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Closed-loop target-collection mission.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "results/mission")]
        out: PathBuf,
    },
    /// Monte-Carlo campaign.
    Experiment {
        which: Which,
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SVG line chart of a result CSV, written beside it.
    Plot {
        csv: PathBuf,
        /// Comma-separated columns (default: all numeric ones).
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Fig1,
    Fig2,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| ExperimentError::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| ExperimentError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))
}

fn execution(workers: Option<usize>) -> Result<Execution> {
    match workers {
        Some(0) => Err(ExperimentError::Config("worker count must be positive".into())),
        Some(1) => Ok(Execution::Sequential),
        Some(w) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build_global()
                .map_err(|e| ExperimentError::Config(format!("worker pool: {e}")))?;
            #[cfg(not(feature = "parallel"))]
            let _ = w;
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

/// Returns whether the run finished without a terminating violation.
fn run(cli: Cli) -> Result<bool> {
    let exec = execution(cli.workers)?;
    match cli.command {
        Command::Analyze { file, tol } => {
            let f = load_framework(&file)?;
            print_json(&analyze(&f, tol)?)?;
        }
        Command::Decompose { file, tol } => {
            let f = load_framework(&file)?;
            print_json(&decomposition(&f, tol)?)?;
        }
        Command::Simulate { config, seed, out } => {
            let mut cfg: MissionConfig = load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let run = run_mission(&cfg)?;
            std::fs::create_dir_all(&out)?;
            trace_table(&run).save(&out.join("trace.csv"))?;
            events_table(&run).save(&out.join("events.csv"))?;
            if cfg.message_log {
                message_table(&run.messages).save(&out.join("messages.csv"))?;
            }
            write_json(&out.join("snapshots.json"), &run.snapshots)?;
            let s = summary(&run);
            write_json(&out.join("summary.json"), &s)?;
            print_json(&s)?;
            if let Some(e) = &run.failure {
                eprintln!("run terminated at t = {}: {e}", s.time_completed);
                return Ok(false);
            }
        }
        Command::Experiment { which, config, out } => match which {
            Which::Fig1 => {
                let cfg: Fig1Config = load(&config)?;
                let rows = run_fig1(&cfg, exec)?;
                let path = out.unwrap_or_else(|| PathBuf::from("results/fig1.csv"));
                fig1_table(&cfg, &rows).save(&path)?;
                println!("{}", path.display());
            }
            Which::Fig2 => {
                let cfg: Fig2Config = load(&config)?;
                let rows = run_fig2(&cfg, exec)?;
                let path = out.unwrap_or_else(|| PathBuf::from("results/fig2.csv"));
                fig2_table(&cfg, &rows).save(&path)?;
                println!("{}", path.display());
            }
        },
        Command::Plot { csv, columns } => {
            let svg = plot_csv(&csv, columns.as_deref())?;
            println!("{}", svg.display());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
