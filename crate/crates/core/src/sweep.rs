//! Multi-run orchestration: parameter sweeps and the federated vs
//! single-location capacity comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::{run_with, EngineError, RunOptions};
use crate::report::{emit_csv, ReportError, RunSummary, SCHEMA_VERSION, SUMMARY_COLUMNS};
use crate::scenario::{build_scenario, FederationMode, ScenarioConfig, ScenarioError};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("unknown sweep parameter `{0}` (expected interarrival, devices, or locations)")]
    UnknownParameter(String),
    #[error("sweep values list is empty")]
    EmptyValues,
    #[error("seed list is empty")]
    EmptySeeds,
    #[error("value {value} is invalid for `{parameter}`: {reason}")]
    BadValue { parameter: String, value: f64, reason: String },
    #[error("latency budget must be positive, got {0}")]
    BadBudget(f64),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// One run of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub parameter: String,
    pub value: f64,
    pub seed: u64,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub runs: Vec<SweepRun>,
}

impl SweepReport {
    pub fn combined_csv(&self) -> String {
        let mut out = format!("# schema_version = {SCHEMA_VERSION}\nparameter,value,{SUMMARY_COLUMNS}\n");
        for r in &self.runs {
            let _ = writeln!(out, "{},{},{}", r.parameter, r.value, r.summary.csv_row());
        }
        out
    }
}

fn apply_parameter(
    config: &ScenarioConfig,
    parameter: &str,
    value: f64,
) -> Result<ScenarioConfig, SweepError> {
    let mut cfg = config.clone();
    let bad = |reason: &str| SweepError::BadValue {
        parameter: parameter.to_string(),
        value,
        reason: reason.to_string(),
    };
    match parameter {
        "interarrival" => {
            if value <= 0.0 || value.is_nan() {
                return Err(bad("must be positive"));
            }
            cfg.workload.mean_interarrival_s = value;
        }
        "devices" => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(bad("must be a nonnegative integer"));
            }
            cfg.workload.devices = value as u32;
        }
        "locations" => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(bad("must be a positive integer"));
            }
            cfg.topology.locations = value as u32;
        }
        other => return Err(SweepError::UnknownParameter(other.to_string())),
    }
    Ok(cfg)
}

/// Runs the cross product of `values` and `seeds`, one independent
/// deterministic run each. With `out_dir` set, per-run CSVs land in
/// `<out>/<parameter>=<value>/seed=<seed>/` and the combined summary in
/// `<out>/sweep_summary.csv`.
pub fn sweep(
    config: &ScenarioConfig,
    parameter: &str,
    values: &[f64],
    seeds: &[u64],
    out_dir: Option<&Path>,
) -> Result<SweepReport, SweepError> {
    if values.is_empty() {
        return Err(SweepError::EmptyValues);
    }
    if seeds.is_empty() {
        return Err(SweepError::EmptySeeds);
    }
    let mut report = SweepReport::default();
    for value in values {
        let cfg = apply_parameter(config, parameter, *value)?;
        let scenario = build_scenario(&cfg)?;
        for seed in seeds {
            let run_report = run_with(&scenario, *seed, &RunOptions::default())?;
            if let Some(dir) = out_dir {
                let run_dir = dir.join(format!("{parameter}={value}")).join(format!("seed={seed}"));
                emit_csv(&run_report, &run_dir)?;
            }
            report.runs.push(SweepRun {
                parameter: parameter.to_string(),
                value: *value,
                seed: *seed,
                summary: run_report.summary,
            });
        }
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)
            .map_err(|source| SweepError::Io { path: dir.to_path_buf(), source })?;
        let path = dir.join("sweep_summary.csv");
        fs::write(&path, report.combined_csv())
            .map_err(|source| SweepError::Io { path, source })?;
    }
    Ok(report)
}

/// Capacity search outcome for both arms under one seed.
#[derive(Debug, Clone, Copy)]
pub struct CompareSeedResult {
    pub seed: u64,
    pub federated_supported: u32,
    pub single_location_supported: u32,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub budget_s: f64,
    pub max_devices: u32,
    pub step: u32,
    pub seeds: Vec<CompareSeedResult>,
}

impl CompareReport {
    pub fn csv(&self) -> String {
        let mut out = format!(
            "# schema_version = {SCHEMA_VERSION}\nseed,budget_s,federated_supported_users,single_location_supported_users\n"
        );
        for r in &self.seeds {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.seed, self.budget_s, r.federated_supported, r.single_location_supported
            );
        }
        out
    }
}

/// Largest device count in `[0, max_devices]` whose run meets the latency
/// budget, found by doubling then bisection at `step` resolution. Device
/// counts above the passing frontier are assumed to keep failing.
fn supported_users(
    config: &ScenarioConfig,
    options: &RunOptions,
    seed: u64,
    budget_s: f64,
    max_devices: u32,
    step: u32,
) -> Result<u32, SweepError> {
    let mut cache: BTreeMap<u32, bool> = BTreeMap::new();
    let mut pass = |n: u32| -> Result<bool, SweepError> {
        if let Some(hit) = cache.get(&n) {
            return Ok(*hit);
        }
        let mut cfg = config.clone();
        cfg.workload.devices = n;
        let scenario = build_scenario(&cfg)?;
        let report = run_with(&scenario, seed, options)?;
        let ok = report.summary.p95_latency_s <= budget_s;
        cache.insert(n, ok);
        Ok(ok)
    };

    if max_devices == 0 {
        return Ok(0);
    }
    let step = step.max(1);
    let mut lo = 0u32; // largest count known to pass
    let mut n = step.min(max_devices);
    // Double until a probe fails; that probe becomes the bisection ceiling.
    let mut hi = loop {
        if pass(n)? {
            lo = n;
            if n >= max_devices {
                return Ok(max_devices);
            }
            n = (n * 2).min(max_devices);
        } else {
            break n;
        }
    };
    while hi - lo > step {
        let mid = lo + (hi - lo) / 2;
        if pass(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Runs the capacity search twice per seed: federated (leasing as
/// configured, devices homed to their nearest broker) and single-location
/// (leasing disabled, every request confined to the lowest-id location).
/// The config's device count caps the search.
pub fn compare_baseline(
    config: &ScenarioConfig,
    budget_s: f64,
    seeds: &[u64],
    step: u32,
    out_dir: Option<&Path>,
) -> Result<CompareReport, SweepError> {
    if budget_s <= 0.0 || budget_s.is_nan() {
        return Err(SweepError::BadBudget(budget_s));
    }
    if seeds.is_empty() {
        return Err(SweepError::EmptySeeds);
    }
    let max_devices = config.workload.devices;
    let step = step.max(1);

    let mut single_cfg = config.clone();
    single_cfg.topology.federation = FederationMode::None;
    let confined = RunOptions { confine_to_lowest_location: true };
    let natural = RunOptions::default();

    let mut results = Vec::new();
    for seed in seeds {
        let federated = supported_users(config, &natural, *seed, budget_s, max_devices, step)?;
        let single = supported_users(&single_cfg, &confined, *seed, budget_s, max_devices, step)?;
        results.push(CompareSeedResult {
            seed: *seed,
            federated_supported: federated,
            single_location_supported: single,
        });
    }
    let report = CompareReport { budget_s, max_devices, step, seeds: results };
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)
            .map_err(|source| SweepError::Io { path: dir.to_path_buf(), source })?;
        let path = dir.join("compare_summary.csv");
        fs::write(&path, report.csv()).map_err(|source| SweepError::Io { path, source })?;
    }
    Ok(report)
}
