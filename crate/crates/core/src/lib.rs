//! Deterministic discrete-event simulator for federated fog computing.
//!
//! A set of fog locations, each a handful of compute nodes behind a broker,
//! serves offloaded requests from mobile devices. Brokers lease capacity
//! from each other when their own location cannot carry the offered load,
//! and escalate to a fixed-latency cloud sink as the last resort. The
//! simulator is seeded and single-threaded per run: identical scenario and
//! seed produce byte-identical metric output.
//!
//! Crate layout:
//!
//! - [`domain`]: entities (nodes, brokers, locations, devices) and the
//!   topology graph with validation.
//! - [`model`]: the analytic queuing/cost model used as the allocation
//!   predictor.
//! - [`federation`]: response-time composition, availability, and the
//!   resource-allocation decision over local, leased, and cloud candidates.
//! - [`mobility`]: linear, circular, and random-waypoint movement plus
//!   access-point handover.
//! - [`engine`]: the event loop with workload generation, multi-server
//!   node runtimes, packet loss, energy accounting, and load estimation.
//! - [`scenario`]: the line-oriented config format and topology builder.
//! - [`report`]: per-interval metrics, latency samples, and CSV export.
//! - [`sweep`]: parameter sweeps and the federated-vs-single-location
//!   capacity comparison.

pub mod domain;
pub mod engine;
pub mod federation;
pub mod mobility;
pub mod model;
pub mod report;
pub mod scenario;
pub mod sweep;

pub use domain::{
    distance, nearest_access_point, validate_topology, AccessPoint, Broker, CloudSink, CostParams,
    FogLocation, FogNode, MobileDevice, Position, Request, Topology, ValidationReport, Violation,
};
pub use engine::{run, run_with, RunOptions};
pub use federation::{AllocationDecision, AllocationKind, Candidate, Constraints};
pub use mobility::{Handover, MobilityModel, MobilityState};
pub use report::{emit_csv, LatencySample, MetricsRecord, MetricsReport, RunSummary};
pub use scenario::{build_scenario, parse_config, Scenario, ScenarioConfig};
pub use sweep::{compare_baseline, sweep, CompareReport, SweepReport};
