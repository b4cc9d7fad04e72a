//! `fogfed`: validate scenarios, run single simulations, sweep parameters,
//! and compare federated against single-location deployments.
//!
//! Exit codes: 0 on success, 1 on configuration or validation errors,
//! 2 on runtime errors (I/O, engine faults).

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fogfed_core::engine::{self, EngineError};
use fogfed_core::report::emit_csv;
use fogfed_core::scenario::{build_scenario, parse_config, ScenarioConfig};
use fogfed_core::sweep::{compare_baseline, sweep, SweepError};

#[derive(Parser)]
#[command(name = "fogfed", version, about = "Federated fog computing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a scenario config and validate the topology it builds.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one simulation and write intervals/latency/summary CSVs.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed from the config's [run] section.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the cross product of parameter values and seeds.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `name=v1,v2,...` with name one of interarrival, devices, locations.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search the supported device count for the federated and
    /// single-location arms.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// p95 latency budget in seconds (inf allowed).
        #[arg(long)]
        budget: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        /// Device-count resolution of the search.
        #[arg(long, default_value_t = 10)]
        step: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Validation(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<fogfed_core::scenario::ScenarioError> for CliError {
    fn from(e: fogfed_core::scenario::ScenarioError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidScenario(_) => CliError::Validation(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<fogfed_core::report::ReportError> for CliError {
    fn from(e: fogfed_core::report::ReportError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::UnknownParameter(_)
            | SweepError::EmptyValues
            | SweepError::EmptySeeds
            | SweepError::BadValue { .. }
            | SweepError::BadBudget(_) => CliError::Validation(e.to_string()),
            SweepError::Scenario(inner) => inner.into(),
            SweepError::Engine(inner) => inner.into(),
            SweepError::Report(inner) => inner.into(),
            SweepError::Io { .. } => CliError::Runtime(e.to_string()),
        }
    }
}

fn load_config(path: &PathBuf) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("reading {}: {e}", path.display())))?;
    Ok(parse_config(&text)?)
}

fn parse_param(spec: &str) -> Result<(String, Vec<f64>), CliError> {
    let (name, values) = spec.split_once('=').ok_or_else(|| {
        CliError::Validation(format!("--param expects `name=v1,v2,...`, got `{spec}`"))
    })?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("bad sweep value `{v}`")))
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    Ok((name.trim().to_string(), values))
}

fn run_command(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            build_scenario(&cfg)?;
            println!("ok");
        }
        Command::Simulate { config, seed, out } => {
            let cfg = load_config(&config)?;
            let scenario = build_scenario(&cfg)?;
            let seed = seed.unwrap_or(cfg.run.seed);
            let report = engine::run(&scenario, seed)?;
            let paths = emit_csv(&report, &out)?;
            let s = &report.summary;
            println!(
                "simulated {}s, seed {seed}: generated {}, completed {} \
                 (local {}, leased {}, cloud {}), dropped {}, rejected {}, \
                 mean latency {:.4}s, p95 {:.4}s",
                s.duration_s,
                s.generated,
                s.completed,
                s.completed_local,
                s.completed_leased,
                s.completed_cloud,
                s.dropped,
                s.rejected,
                s.mean_latency_s,
                s.p95_latency_s
            );
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Command::Sweep { config, param, seeds, out } => {
            let cfg = load_config(&config)?;
            let (name, values) = parse_param(&param)?;
            let report = sweep(&cfg, &name, &values, &seeds, Some(&out))?;
            println!("{} runs ({} values x {} seeds)", report.runs.len(), values.len(), seeds.len());
            println!("wrote {}", out.join("sweep_summary.csv").display());
        }
        Command::Compare { config, budget, seeds, step, out } => {
            let cfg = load_config(&config)?;
            let report = compare_baseline(&cfg, budget, &seeds, step, Some(&out))?;
            for r in &report.seeds {
                println!(
                    "seed {}: federated supports {} devices, single location {} \
                     (budget {}s, max {}, step {})",
                    r.seed,
                    r.federated_supported,
                    r.single_location_supported,
                    report.budget_s,
                    report.max_devices,
                    report.step
                );
            }
            println!("wrote {}", out.join("compare_summary.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code())
        }
    }
}
