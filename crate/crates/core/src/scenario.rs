//! Scenario configuration: a line-oriented, sectioned `key = value` format
//! chosen for diffability when hand-editing sweeps, plus the seeded
//! topology builder that turns a config into a concrete world.
//!
//! Grammar, one statement per line:
//!
//! ```text
//! # comment (full-line only)
//! schema_version = 1        before any section header
//! [section]                 topology | nodes | workload | mobility | model | run
//! key = value               value: integer, float (inf allowed), bool,
//!                           keyword, or range `lo..hi`
//! ```
//!
//! Unknown sections and keys are rejected with their line number; every
//! omitted key takes the documented default. A scalar where a range is
//! allowed means the degenerate range. `parse` followed by
//! [`ScenarioConfig::to_canonical_string`] is idempotent: re-parsing the
//! canonical form yields an identical config.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand::SeedableRng;
use thiserror::Error;

use crate::domain::{
    validate_topology, AccessPoint, Broker, CloudSink, CostParams, Edge, FogLocation, FogNode,
    MobileDevice, Position, Topology, ValidationReport,
};
use crate::federation::Constraints;
use crate::mobility::MobilityModel;

/// Bundled scenario mirroring the reference evaluation setup: five fog
/// locations with 2..5 nodes each, one broker per location, two cloud
/// sinks, mixed mobility, and a 500 s horizon.
pub const REFERENCE_CONFIG: &str = include_str!("../scenarios/reference.cfg");

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{message}")]
    Semantic { message: String },
    #[error("topology validation failed:\n{report}")]
    InvalidTopology { report: ValidationReport },
}

/// How brokers lease from each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FederationMode {
    /// Every broker may lease from every other broker.
    Full,
    /// No leasing; each location stands alone (cloud overflow still works).
    None,
}

/// Which allocation policy the engine runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationPolicy {
    /// Minimal predicted response time with price/availability validation.
    Fra,
    /// Uniform-random over the feasible candidates of the first non-empty
    /// tier; baseline for energy-balance comparisons.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MobilityKind {
    Linear,
    Circular,
    RandomWaypoint,
    /// Cycle linear, circular, random waypoint across devices.
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologySection {
    pub arena_size_m: f64,
    pub locations: u32,
    pub nodes_per_location: (u32, u32),
    pub access_points: u32,
    pub cloud_sinks: u32,
    /// Seed for infrastructure placement; independent of the run seed so
    /// seed sweeps share hardware.
    pub topology_seed: u64,
    /// Admission capacity per location in tasks/s; `None` (`auto`) derives
    /// it from the member nodes' total drain rate.
    pub queue_capacity: Option<f64>,
    pub link_bandwidth_bps: f64,
    pub federation: FederationMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodesSection {
    pub server_count: (u32, u32),
    pub service_rate: (f64, f64),
    pub price: (f64, f64),
    pub failure_prob: (f64, f64),
    pub power_idle_w: f64,
    pub power_busy_w: f64,
    /// Per-node queue bound; `None` (`none`) means unbounded.
    pub queue_limit: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSection {
    pub devices: u32,
    /// Mean seconds between requests per device; `inf` silences a device.
    pub mean_interarrival_s: f64,
    pub small_task_size: f64,
    pub large_task_size: f64,
    pub large_task_fraction: f64,
    pub packet_error_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilitySection {
    pub model: MobilityKind,
    pub tick_s: f64,
    pub linear_speed_mps: f64,
    pub circular_radius_m: f64,
    pub circular_angular_velocity_rad_s: f64,
    pub rwp_speed_mps: (f64, f64),
    pub rwp_pause_s: f64,
    pub device_range_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSection {
    pub beta1_s_per_m: f64,
    pub beta2_s_per_m: f64,
    pub q_unit: f64,
    pub hop_count: u32,
    pub cloud_comm_cost_s: f64,
    pub cq_max: f64,
    pub max_price: f64,
    pub min_availability: f64,
    pub energy_aware: bool,
    pub epsilon_t_s: f64,
    pub cloud_latency_s: f64,
    pub cloud_price: f64,
    pub allocation: AllocationPolicy,
    pub estimator_window_s: f64,
    pub estimator_alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub duration_s: f64,
    pub seed: u64,
    pub metrics_interval_s: f64,
}

/// Fully resolved scenario configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub topology: TopologySection,
    pub nodes: NodesSection,
    pub workload: WorkloadSection,
    pub mobility: MobilitySection,
    pub model: ModelSection,
    pub run: RunSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: 1,
            topology: TopologySection {
                arena_size_m: 1000.0,
                locations: 5,
                nodes_per_location: (2, 5),
                access_points: 20,
                cloud_sinks: 2,
                topology_seed: 1,
                queue_capacity: None,
                link_bandwidth_bps: 1e10,
                federation: FederationMode::Full,
            },
            nodes: NodesSection {
                server_count: (2, 2),
                service_rate: (15.0, 15.0),
                price: (1.0, 1.0),
                failure_prob: (0.05, 0.05),
                power_idle_w: 50.0,
                power_busy_w: 150.0,
                queue_limit: None,
            },
            workload: WorkloadSection {
                devices: 200,
                mean_interarrival_s: 1.0,
                small_task_size: 1.0,
                large_task_size: 4.0,
                large_task_fraction: 0.2,
                packet_error_rate: 1e-3,
            },
            mobility: MobilitySection {
                model: MobilityKind::RandomWaypoint,
                tick_s: 1.0,
                linear_speed_mps: 1.5,
                circular_radius_m: 100.0,
                circular_angular_velocity_rad_s: 0.0628,
                rwp_speed_mps: (0.5, 1.5),
                rwp_pause_s: 5.0,
                device_range_m: 250.0,
            },
            model: ModelSection {
                beta1_s_per_m: 1e-4,
                beta2_s_per_m: 1e-4,
                q_unit: 0.05,
                hop_count: 2,
                cloud_comm_cost_s: 0.01,
                cq_max: 1e6,
                max_price: 100.0,
                min_availability: 0.5,
                energy_aware: true,
                epsilon_t_s: 0.05,
                cloud_latency_s: 2.0,
                cloud_price: 5.0,
                allocation: AllocationPolicy::Fra,
                estimator_window_s: 5.0,
                estimator_alpha: 0.3,
            },
            run: RunSection { duration_s: 500.0, seed: 42, metrics_interval_s: 5.0 },
        }
    }
}

const SECTIONS: [&str; 6] = ["topology", "nodes", "workload", "mobility", "model", "run"];

struct RawConfig {
    entries: BTreeMap<(String, String), (usize, String)>,
}

impl RawConfig {
    fn take(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        self.entries.remove(&(section.to_string(), key.to_string()))
    }
}

fn scan(text: &str) -> Result<RawConfig, ScenarioError> {
    let mut entries = BTreeMap::new();
    let mut section = String::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| ScenarioError::Syntax {
                line: line_no,
                message: "section header missing closing ']'".into(),
            })?;
            if !SECTIONS.contains(&name) {
                return Err(ScenarioError::Syntax {
                    line: line_no,
                    message: format!("unknown section [{name}]"),
                });
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ScenarioError::Syntax {
            line: line_no,
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(ScenarioError::Syntax {
                line: line_no,
                message: "expected `key = value`".into(),
            });
        }
        if section.is_empty() && key != "schema_version" {
            return Err(ScenarioError::Syntax {
                line: line_no,
                message: format!("key `{key}` appears before any section header"),
            });
        }
        if entries.insert((section.clone(), key.clone()), (line_no, value)).is_some() {
            return Err(ScenarioError::Syntax {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(RawConfig { entries })
}

fn syntax(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Syntax { line, message: message.into() }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ScenarioError> {
    let x: f64 =
        v.parse().map_err(|_| syntax(line, format!("`{key}`: expected a number, got `{v}`")))?;
    if x.is_nan() {
        return Err(syntax(line, format!("`{key}`: NaN is not allowed")));
    }
    Ok(x)
}

fn parse_u64(line: usize, key: &str, v: &str) -> Result<u64, ScenarioError> {
    v.parse().map_err(|_| syntax(line, format!("`{key}`: expected an integer, got `{v}`")))
}

fn parse_u32(line: usize, key: &str, v: &str) -> Result<u32, ScenarioError> {
    v.parse().map_err(|_| syntax(line, format!("`{key}`: expected an integer, got `{v}`")))
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool, ScenarioError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(syntax(line, format!("`{key}`: expected true or false, got `{v}`"))),
    }
}

fn parse_u32_range(line: usize, key: &str, v: &str) -> Result<(u32, u32), ScenarioError> {
    if let Some((lo, hi)) = v.split_once("..") {
        let lo = parse_u32(line, key, lo.trim())?;
        let hi = parse_u32(line, key, hi.trim())?;
        Ok((lo, hi))
    } else {
        let x = parse_u32(line, key, v)?;
        Ok((x, x))
    }
}

fn parse_f64_range(line: usize, key: &str, v: &str) -> Result<(f64, f64), ScenarioError> {
    if let Some((lo, hi)) = v.split_once("..") {
        let lo = parse_f64(line, key, lo.trim())?;
        let hi = parse_f64(line, key, hi.trim())?;
        Ok((lo, hi))
    } else {
        let x = parse_f64(line, key, v)?;
        Ok((x, x))
    }
}

macro_rules! field {
    ($raw:ident, $sec:literal, $key:literal, $default:expr, $parser:ident) => {
        match $raw.take($sec, $key) {
            None => $default,
            Some((line, v)) => $parser(line, $key, &v)?,
        }
    };
}

/// Parses a configuration, applying defaults and rejecting unknown keys.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let mut raw = scan(text)?;
    let defaults = ScenarioConfig::default();

    let schema_version = match raw.take("", "schema_version") {
        None => defaults.schema_version,
        Some((line, v)) => parse_u32(line, "schema_version", &v)?,
    };

    let topology = TopologySection {
        arena_size_m: field!(raw, "topology", "arena_size_m", defaults.topology.arena_size_m, parse_f64),
        locations: field!(raw, "topology", "locations", defaults.topology.locations, parse_u32),
        nodes_per_location: field!(
            raw, "topology", "nodes_per_location",
            defaults.topology.nodes_per_location, parse_u32_range
        ),
        access_points: field!(raw, "topology", "access_points", defaults.topology.access_points, parse_u32),
        cloud_sinks: field!(raw, "topology", "cloud_sinks", defaults.topology.cloud_sinks, parse_u32),
        topology_seed: field!(raw, "topology", "topology_seed", defaults.topology.topology_seed, parse_u64),
        queue_capacity: match raw.take("topology", "queue_capacity") {
            None => defaults.topology.queue_capacity,
            Some((_, v)) if v == "auto" => None,
            Some((line, v)) => Some(parse_f64(line, "queue_capacity", &v)?),
        },
        link_bandwidth_bps: field!(
            raw, "topology", "link_bandwidth_bps",
            defaults.topology.link_bandwidth_bps, parse_f64
        ),
        federation: match raw.take("topology", "federation") {
            None => defaults.topology.federation,
            Some((_, v)) if v == "full" => FederationMode::Full,
            Some((_, v)) if v == "none" => FederationMode::None,
            Some((line, v)) => {
                return Err(syntax(line, format!("`federation`: expected full or none, got `{v}`")))
            }
        },
    };

    let nodes = NodesSection {
        server_count: field!(raw, "nodes", "server_count", defaults.nodes.server_count, parse_u32_range),
        service_rate: field!(raw, "nodes", "service_rate", defaults.nodes.service_rate, parse_f64_range),
        price: field!(raw, "nodes", "price", defaults.nodes.price, parse_f64_range),
        failure_prob: field!(raw, "nodes", "failure_prob", defaults.nodes.failure_prob, parse_f64_range),
        power_idle_w: field!(raw, "nodes", "power_idle_w", defaults.nodes.power_idle_w, parse_f64),
        power_busy_w: field!(raw, "nodes", "power_busy_w", defaults.nodes.power_busy_w, parse_f64),
        queue_limit: match raw.take("nodes", "queue_limit") {
            None => defaults.nodes.queue_limit,
            Some((_, v)) if v == "none" => None,
            Some((line, v)) => Some(parse_u32(line, "queue_limit", &v)?),
        },
    };

    let workload = WorkloadSection {
        devices: field!(raw, "workload", "devices", defaults.workload.devices, parse_u32),
        mean_interarrival_s: field!(
            raw, "workload", "mean_interarrival_s",
            defaults.workload.mean_interarrival_s, parse_f64
        ),
        small_task_size: field!(
            raw, "workload", "small_task_size", defaults.workload.small_task_size, parse_f64
        ),
        large_task_size: field!(
            raw, "workload", "large_task_size", defaults.workload.large_task_size, parse_f64
        ),
        large_task_fraction: field!(
            raw, "workload", "large_task_fraction",
            defaults.workload.large_task_fraction, parse_f64
        ),
        packet_error_rate: field!(
            raw, "workload", "packet_error_rate", defaults.workload.packet_error_rate, parse_f64
        ),
    };

    let mobility = MobilitySection {
        model: match raw.take("mobility", "model") {
            None => defaults.mobility.model,
            Some((_, v)) if v == "linear" => MobilityKind::Linear,
            Some((_, v)) if v == "circular" => MobilityKind::Circular,
            Some((_, v)) if v == "random_waypoint" => MobilityKind::RandomWaypoint,
            Some((_, v)) if v == "mixed" => MobilityKind::Mixed,
            Some((line, v)) => {
                return Err(syntax(
                    line,
                    format!("`model`: expected linear, circular, random_waypoint, or mixed, got `{v}`"),
                ))
            }
        },
        tick_s: field!(raw, "mobility", "tick_s", defaults.mobility.tick_s, parse_f64),
        linear_speed_mps: field!(
            raw, "mobility", "linear_speed_mps", defaults.mobility.linear_speed_mps, parse_f64
        ),
        circular_radius_m: field!(
            raw, "mobility", "circular_radius_m", defaults.mobility.circular_radius_m, parse_f64
        ),
        circular_angular_velocity_rad_s: field!(
            raw, "mobility", "circular_angular_velocity_rad_s",
            defaults.mobility.circular_angular_velocity_rad_s, parse_f64
        ),
        rwp_speed_mps: field!(
            raw, "mobility", "rwp_speed_mps", defaults.mobility.rwp_speed_mps, parse_f64_range
        ),
        rwp_pause_s: field!(raw, "mobility", "rwp_pause_s", defaults.mobility.rwp_pause_s, parse_f64),
        device_range_m: field!(
            raw, "mobility", "device_range_m", defaults.mobility.device_range_m, parse_f64
        ),
    };

    let model = ModelSection {
        beta1_s_per_m: field!(raw, "model", "beta1_s_per_m", defaults.model.beta1_s_per_m, parse_f64),
        beta2_s_per_m: field!(raw, "model", "beta2_s_per_m", defaults.model.beta2_s_per_m, parse_f64),
        q_unit: field!(raw, "model", "q_unit", defaults.model.q_unit, parse_f64),
        hop_count: field!(raw, "model", "hop_count", defaults.model.hop_count, parse_u32),
        cloud_comm_cost_s: field!(
            raw, "model", "cloud_comm_cost_s", defaults.model.cloud_comm_cost_s, parse_f64
        ),
        cq_max: field!(raw, "model", "cq_max", defaults.model.cq_max, parse_f64),
        max_price: field!(raw, "model", "max_price", defaults.model.max_price, parse_f64),
        min_availability: field!(
            raw, "model", "min_availability", defaults.model.min_availability, parse_f64
        ),
        energy_aware: field!(raw, "model", "energy_aware", defaults.model.energy_aware, parse_bool),
        epsilon_t_s: field!(raw, "model", "epsilon_t_s", defaults.model.epsilon_t_s, parse_f64),
        cloud_latency_s: field!(
            raw, "model", "cloud_latency_s", defaults.model.cloud_latency_s, parse_f64
        ),
        cloud_price: field!(raw, "model", "cloud_price", defaults.model.cloud_price, parse_f64),
        allocation: match raw.take("model", "allocation") {
            None => defaults.model.allocation,
            Some((_, v)) if v == "fra" => AllocationPolicy::Fra,
            Some((_, v)) if v == "random" => AllocationPolicy::Random,
            Some((line, v)) => {
                return Err(syntax(line, format!("`allocation`: expected fra or random, got `{v}`")))
            }
        },
        estimator_window_s: field!(
            raw, "model", "estimator_window_s", defaults.model.estimator_window_s, parse_f64
        ),
        estimator_alpha: field!(
            raw, "model", "estimator_alpha", defaults.model.estimator_alpha, parse_f64
        ),
    };

    let run = RunSection {
        duration_s: field!(raw, "run", "duration_s", defaults.run.duration_s, parse_f64),
        seed: field!(raw, "run", "seed", defaults.run.seed, parse_u64),
        metrics_interval_s: field!(
            raw, "run", "metrics_interval_s", defaults.run.metrics_interval_s, parse_f64
        ),
    };

    if let Some(((section, key), (line, _))) = raw.entries.into_iter().next() {
        let place = if section.is_empty() { String::new() } else { format!(" in [{section}]") };
        return Err(syntax(line, format!("unknown key `{key}`{place}")));
    }

    let config = ScenarioConfig { schema_version, topology, nodes, workload, mobility, model, run };
    validate_config(&config)?;
    Ok(config)
}

fn semantic(message: impl Into<String>) -> ScenarioError {
    ScenarioError::Semantic { message: message.into() }
}

fn validate_config(c: &ScenarioConfig) -> Result<(), ScenarioError> {
    if c.schema_version != 1 {
        return Err(semantic(format!("unsupported schema_version {}", c.schema_version)));
    }
    let t = &c.topology;
    if t.arena_size_m <= 0.0 || !t.arena_size_m.is_finite() {
        return Err(semantic("arena_size_m must be positive and finite"));
    }
    if t.locations < 1 {
        return Err(semantic("locations must be at least 1"));
    }
    if t.nodes_per_location.0 < 1 || t.nodes_per_location.0 > t.nodes_per_location.1 {
        return Err(semantic("nodes_per_location must satisfy 1 <= min <= max"));
    }
    if let Some(cap) = t.queue_capacity {
        if cap < 0.0 || !cap.is_finite() {
            return Err(semantic("queue_capacity must be nonnegative"));
        }
    }
    if t.link_bandwidth_bps <= 0.0 || t.link_bandwidth_bps.is_nan() {
        return Err(semantic("link_bandwidth_bps must be positive"));
    }
    let n = &c.nodes;
    if n.server_count.0 < 1 || n.server_count.0 > n.server_count.1 {
        return Err(semantic("server_count must satisfy 1 <= min <= max"));
    }
    if n.service_rate.0 <= 0.0 || n.service_rate.0.is_nan() || n.service_rate.0 > n.service_rate.1 {
        return Err(semantic("service_rate must satisfy 0 < min <= max"));
    }
    if n.price.0 < 0.0 || n.price.0 > n.price.1 {
        return Err(semantic("price must satisfy 0 <= min <= max"));
    }
    if n.failure_prob.0 < 0.0 || n.failure_prob.1 > 1.0 || n.failure_prob.0 > n.failure_prob.1 {
        return Err(semantic("failure_prob must be a subrange of [0, 1]"));
    }
    if n.power_idle_w < 0.0 || n.power_busy_w < n.power_idle_w {
        return Err(semantic("power profile must satisfy busy >= idle >= 0"));
    }
    let w = &c.workload;
    if w.mean_interarrival_s <= 0.0 || w.mean_interarrival_s.is_nan() {
        return Err(semantic("mean_interarrival_s must be positive (inf allowed)"));
    }
    if w.small_task_size <= 0.0 || w.small_task_size.is_nan()
        || w.large_task_size <= 0.0 || w.large_task_size.is_nan()
    {
        return Err(semantic("task sizes must be positive"));
    }
    if !(0.0..=1.0).contains(&w.large_task_fraction) {
        return Err(semantic("large_task_fraction must lie in [0, 1]"));
    }
    if !(0.0..=1.0).contains(&w.packet_error_rate) {
        return Err(semantic("packet_error_rate must lie in [0, 1]"));
    }
    let m = &c.mobility;
    if m.tick_s <= 0.0 || !m.tick_s.is_finite() {
        return Err(semantic("tick_s must be positive"));
    }
    if m.linear_speed_mps < 0.0 {
        return Err(semantic("linear_speed_mps must be nonnegative"));
    }
    if m.circular_radius_m <= 0.0 || m.circular_radius_m.is_nan() {
        return Err(semantic("circular_radius_m must be positive"));
    }
    let uses_circular = matches!(m.model, MobilityKind::Circular | MobilityKind::Mixed);
    if uses_circular && 2.0 * m.circular_radius_m > t.arena_size_m {
        return Err(semantic("circular_radius_m must fit inside the arena"));
    }
    if m.rwp_speed_mps.0 < 0.0 || m.rwp_speed_mps.0 > m.rwp_speed_mps.1 {
        return Err(semantic("rwp_speed_mps must satisfy 0 <= min <= max"));
    }
    if m.rwp_pause_s < 0.0 {
        return Err(semantic("rwp_pause_s must be nonnegative"));
    }
    if m.device_range_m <= 0.0 || m.device_range_m.is_nan() {
        return Err(semantic("device_range_m must be positive"));
    }
    let md = &c.model;
    for (name, v) in [
        ("beta1_s_per_m", md.beta1_s_per_m),
        ("beta2_s_per_m", md.beta2_s_per_m),
        ("q_unit", md.q_unit),
        ("cloud_comm_cost_s", md.cloud_comm_cost_s),
        ("max_price", md.max_price),
        ("epsilon_t_s", md.epsilon_t_s),
        ("cloud_latency_s", md.cloud_latency_s),
        ("cloud_price", md.cloud_price),
    ] {
        if v < 0.0 || v.is_nan() {
            return Err(semantic(format!("{name} must be nonnegative")));
        }
    }
    if md.cq_max <= 0.0 || md.cq_max.is_nan() {
        return Err(semantic("cq_max must be positive"));
    }
    if !(0.0..=1.0).contains(&md.min_availability) {
        return Err(semantic("min_availability must lie in [0, 1]"));
    }
    if md.estimator_window_s <= 0.0 || !md.estimator_window_s.is_finite() {
        return Err(semantic("estimator_window_s must be positive"));
    }
    if md.estimator_alpha.is_nan() || md.estimator_alpha <= 0.0 || md.estimator_alpha > 1.0 {
        return Err(semantic("estimator_alpha must lie in (0, 1]"));
    }
    let r = &c.run;
    if r.duration_s <= 0.0 || !r.duration_s.is_finite() {
        return Err(semantic("duration must be positive"));
    }
    if r.metrics_interval_s <= 0.0 || !r.metrics_interval_s.is_finite() {
        return Err(semantic("metrics_interval_s must be positive"));
    }
    Ok(())
}

fn fmt_u32_range(r: (u32, u32)) -> String {
    if r.0 == r.1 {
        format!("{}", r.0)
    } else {
        format!("{}..{}", r.0, r.1)
    }
}

fn fmt_f64_range(r: (f64, f64)) -> String {
    if r.0 == r.1 {
        format!("{}", r.0)
    } else {
        format!("{}..{}", r.0, r.1)
    }
}

impl ScenarioConfig {
    /// Canonical text form: fixed section and key order, shortest
    /// round-trip numbers. Parsing the output reproduces `self` exactly.
    pub fn to_canonical_string(&self) -> String {
        let t = &self.topology;
        let n = &self.nodes;
        let w = &self.workload;
        let m = &self.mobility;
        let md = &self.model;
        let r = &self.run;
        format!(
            "schema_version = {}\n\n\
             [topology]\n\
             arena_size_m = {}\n\
             locations = {}\n\
             nodes_per_location = {}\n\
             access_points = {}\n\
             cloud_sinks = {}\n\
             topology_seed = {}\n\
             queue_capacity = {}\n\
             link_bandwidth_bps = {}\n\
             federation = {}\n\n\
             [nodes]\n\
             server_count = {}\n\
             service_rate = {}\n\
             price = {}\n\
             failure_prob = {}\n\
             power_idle_w = {}\n\
             power_busy_w = {}\n\
             queue_limit = {}\n\n\
             [workload]\n\
             devices = {}\n\
             mean_interarrival_s = {}\n\
             small_task_size = {}\n\
             large_task_size = {}\n\
             large_task_fraction = {}\n\
             packet_error_rate = {}\n\n\
             [mobility]\n\
             model = {}\n\
             tick_s = {}\n\
             linear_speed_mps = {}\n\
             circular_radius_m = {}\n\
             circular_angular_velocity_rad_s = {}\n\
             rwp_speed_mps = {}\n\
             rwp_pause_s = {}\n\
             device_range_m = {}\n\n\
             [model]\n\
             beta1_s_per_m = {}\n\
             beta2_s_per_m = {}\n\
             q_unit = {}\n\
             hop_count = {}\n\
             cloud_comm_cost_s = {}\n\
             cq_max = {}\n\
             max_price = {}\n\
             min_availability = {}\n\
             energy_aware = {}\n\
             epsilon_t_s = {}\n\
             cloud_latency_s = {}\n\
             cloud_price = {}\n\
             allocation = {}\n\
             estimator_window_s = {}\n\
             estimator_alpha = {}\n\n\
             [run]\n\
             duration_s = {}\n\
             seed = {}\n\
             metrics_interval_s = {}\n",
            self.schema_version,
            t.arena_size_m,
            t.locations,
            fmt_u32_range(t.nodes_per_location),
            t.access_points,
            t.cloud_sinks,
            t.topology_seed,
            t.queue_capacity.map_or_else(|| "auto".to_string(), |v| format!("{v}")),
            t.link_bandwidth_bps,
            match t.federation {
                FederationMode::Full => "full",
                FederationMode::None => "none",
            },
            fmt_u32_range(n.server_count),
            fmt_f64_range(n.service_rate),
            fmt_f64_range(n.price),
            fmt_f64_range(n.failure_prob),
            n.power_idle_w,
            n.power_busy_w,
            n.queue_limit.map_or_else(|| "none".to_string(), |v| format!("{v}")),
            w.devices,
            w.mean_interarrival_s,
            w.small_task_size,
            w.large_task_size,
            w.large_task_fraction,
            w.packet_error_rate,
            match m.model {
                MobilityKind::Linear => "linear",
                MobilityKind::Circular => "circular",
                MobilityKind::RandomWaypoint => "random_waypoint",
                MobilityKind::Mixed => "mixed",
            },
            m.tick_s,
            m.linear_speed_mps,
            m.circular_radius_m,
            m.circular_angular_velocity_rad_s,
            fmt_f64_range(m.rwp_speed_mps),
            m.rwp_pause_s,
            m.device_range_m,
            md.beta1_s_per_m,
            md.beta2_s_per_m,
            md.q_unit,
            md.hop_count,
            md.cloud_comm_cost_s,
            md.cq_max,
            md.max_price,
            md.min_availability,
            md.energy_aware,
            md.epsilon_t_s,
            md.cloud_latency_s,
            md.cloud_price,
            match md.allocation {
                AllocationPolicy::Fra => "fra",
                AllocationPolicy::Random => "random",
            },
            md.estimator_window_s,
            md.estimator_alpha,
            r.duration_s,
            r.seed,
            r.metrics_interval_s,
        )
    }
}

/// A config resolved into a concrete, validated world plus the model
/// parameters the engine needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub topology: Topology,
    pub params: CostParams,
    pub constraints: Constraints,
}

fn draw_u32(rng: &mut ChaCha12Rng, range: (u32, u32)) -> u32 {
    if range.0 == range.1 {
        range.0
    } else {
        rng.gen_range(range.0..=range.1)
    }
}

fn draw_f64(rng: &mut ChaCha12Rng, range: (f64, f64)) -> f64 {
    if range.0 == range.1 {
        range.0
    } else {
        rng.gen_range(range.0..range.1)
    }
}

/// Builds and validates the topology for a config. All infrastructure
/// placement derives from `topology_seed`; devices are drawn last so
/// changing the device count leaves the infrastructure untouched.
pub fn build_scenario(config: &ScenarioConfig) -> Result<Scenario, ScenarioError> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.topology.topology_seed);
    let arena = config.topology.arena_size_m;
    let mut next_id = 0u32;
    let mut alloc_id = || {
        let id = next_id;
        next_id += 1;
        id
    };

    let mut topo = Topology {
        arena_size_m: arena,
        nodes_per_location_bounds: config.topology.nodes_per_location,
        ..Default::default()
    };

    for _ in 0..config.topology.locations {
        let location_id = alloc_id();
        let broker_id = alloc_id();
        let position = Position::new(rng.gen_range(0.0..arena), rng.gen_range(0.0..arena));
        let node_count = draw_u32(&mut rng, config.topology.nodes_per_location);
        let mut node_ids = Vec::with_capacity(node_count as usize);
        for _ in 0..node_count {
            let id = alloc_id();
            node_ids.push(id);
            topo.fog_nodes.push(FogNode {
                id,
                location_id,
                server_count: draw_u32(&mut rng, config.nodes.server_count),
                service_rate: draw_f64(&mut rng, config.nodes.service_rate),
                price: draw_f64(&mut rng, config.nodes.price),
                failure_prob: draw_f64(&mut rng, config.nodes.failure_prob),
                power_idle_w: config.nodes.power_idle_w,
                power_busy_w: config.nodes.power_busy_w,
            });
        }
        let queue_capacity = config.topology.queue_capacity.unwrap_or_else(|| {
            node_ids.iter().map(|id| topo.fog_node(*id).unwrap().capacity()).sum()
        });
        topo.locations.push(FogLocation { id: location_id, broker_id, node_ids, queue_capacity });
        topo.brokers.push(Broker {
            id: broker_id,
            location_id,
            position,
            leased_brokers: Default::default(),
            link_bandwidth_bps: config.topology.link_bandwidth_bps,
        });
    }

    // Leasing relationships; the physical backbone mesh exists regardless.
    let broker_ids: Vec<u32> = topo.brokers.iter().map(|b| b.id).collect();
    if config.topology.federation == FederationMode::Full {
        for b in &mut topo.brokers {
            b.leased_brokers = broker_ids.iter().copied().filter(|id| *id != b.id).collect();
        }
    }
    for (i, a) in broker_ids.iter().enumerate() {
        for b in &broker_ids[i + 1..] {
            topo.edges.push(Edge { a: *a, b: *b, latency_override_s: None });
        }
    }

    for _ in 0..config.topology.access_points {
        let id = alloc_id();
        topo.access_points.push(AccessPoint {
            id,
            position: Position::new(rng.gen_range(0.0..arena), rng.gen_range(0.0..arena)),
        });
    }

    for _ in 0..config.topology.cloud_sinks {
        topo.cloud_sinks.push(CloudSink {
            id: alloc_id(),
            latency_s: config.model.cloud_latency_s,
            price: config.model.cloud_price,
        });
    }

    let arrival_rate = if config.workload.mean_interarrival_s.is_finite() {
        1.0 / config.workload.mean_interarrival_s
    } else {
        0.0
    };
    for i in 0..config.workload.devices {
        let id = alloc_id();
        let position = Position::new(rng.gen_range(0.0..arena), rng.gen_range(0.0..arena));
        let kind = match config.mobility.model {
            MobilityKind::Linear => 0,
            MobilityKind::Circular => 1,
            MobilityKind::RandomWaypoint => 2,
            MobilityKind::Mixed => i % 3,
        };
        let mobility = match kind {
            0 => {
                let heading = rng.gen_range(0.0..std::f64::consts::TAU);
                let speed = config.mobility.linear_speed_mps;
                MobilityModel::Linear {
                    velocity_mps: (speed * heading.cos(), speed * heading.sin()),
                }
            }
            1 => {
                let r = config.mobility.circular_radius_m;
                MobilityModel::Circular {
                    center: Position::new(
                        position.x.clamp(r, arena - r),
                        position.y.clamp(r, arena - r),
                    ),
                    radius_m: r,
                    angular_velocity_rad_s: config.mobility.circular_angular_velocity_rad_s,
                }
            }
            _ => MobilityModel::RandomWaypoint {
                speed_mps: config.mobility.rwp_speed_mps,
                pause_s: config.mobility.rwp_pause_s,
                arena_size_m: arena,
            },
        };
        topo.devices.push(MobileDevice {
            id,
            position,
            arrival_rate,
            mobility,
            radio_range_m: config.mobility.device_range_m,
        });
    }

    let report = validate_topology(&topo);
    if !report.is_ok() {
        return Err(ScenarioError::InvalidTopology { report });
    }

    Ok(Scenario {
        config: config.clone(),
        topology: topo,
        params: CostParams {
            beta1_s_per_m: config.model.beta1_s_per_m,
            beta2_s_per_m: config.model.beta2_s_per_m,
            q_unit: config.model.q_unit,
            hop_count: config.model.hop_count,
            cloud_comm_cost_s: config.model.cloud_comm_cost_s,
            cq_max: config.model.cq_max,
        },
        constraints: Constraints {
            max_price: config.model.max_price,
            min_availability: config.model.min_availability,
            energy_aware: config.model.energy_aware,
            energy_tie_window_s: config.model.epsilon_t_s,
        },
    })
}
