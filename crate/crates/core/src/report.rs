//! Run metrics and their CSV serialization.
//!
//! Three files per run, each versioned with a `# schema_version` comment
//! line above the header row:
//!
//! - `intervals.csv`: one row per fog node per metrics interval.
//! - `latency.csv`: one row per completed request.
//! - `summary.csv`: one row of run aggregates.
//!
//! Numeric cells use shortest round-trip decimal formatting, so reading a
//! cell back yields the in-memory value exactly and identical reports
//! serialize to identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::federation::AllocationKind;

/// Format version written into every CSV file.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Per-node observation for one metrics interval.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    /// Interval end, seconds since run start.
    pub t_s: f64,
    pub node_id: u32,
    /// Busy server-time over `servers * interval`, in [0, 1].
    pub utilization: f64,
    pub queue_len: usize,
    /// Requests completed at this node during the interval.
    pub completed: u64,
    /// Mean latency of those completions; 0 when there were none.
    pub mean_latency_s: f64,
    /// Energy drawn during the interval, joules.
    pub energy_j: f64,
}

/// End-to-end record of one completed request.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencySample {
    pub request_id: u64,
    pub created_at_s: f64,
    pub completed_at_s: f64,
    pub node_id: u32,
    pub kind: AllocationKind,
}

impl LatencySample {
    pub fn latency_s(&self) -> f64 {
        self.completed_at_s - self.created_at_s
    }
}

/// Whole-run aggregates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub duration_s: f64,
    pub seed: u64,
    pub devices: u32,
    pub locations: u32,
    pub fog_nodes: u32,
    pub generated: u64,
    pub completed: u64,
    pub completed_local: u64,
    pub completed_leased: u64,
    pub completed_cloud: u64,
    /// Radio losses plus out-of-coverage drops.
    pub dropped: u64,
    pub dropped_loss: u64,
    pub dropped_coverage: u64,
    /// Queue overflows plus allocations with no feasible node.
    pub rejected: u64,
    pub in_flight: u64,
    pub handovers: u64,
    /// Distinct devices with at least one completed request.
    pub supported_users: u32,
    pub mean_latency_s: f64,
    pub p95_latency_s: f64,
    pub total_energy_j: f64,
}

impl RunSummary {
    /// Exact bookkeeping identity over request fates.
    pub fn conservation_holds(&self) -> bool {
        self.generated == self.completed + self.dropped + self.rejected + self.in_flight
    }
}

/// Full output of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsReport {
    pub intervals: Vec<MetricsRecord>,
    pub latencies: Vec<LatencySample>,
    pub summary: RunSummary,
}

impl MetricsReport {
    pub fn intervals_csv(&self) -> String {
        let mut out = csv_header("t,node_id,utilization,queue_len,completed,mean_latency_s,energy_j");
        for r in &self.intervals {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.t_s, r.node_id, r.utilization, r.queue_len, r.completed, r.mean_latency_s,
                r.energy_j
            );
        }
        out
    }

    pub fn latency_csv(&self) -> String {
        let mut out = csv_header("request_id,created_at,completed_at,latency_s,node_id,kind");
        for s in &self.latencies {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.request_id,
                s.created_at_s,
                s.completed_at_s,
                s.latency_s(),
                s.node_id,
                s.kind.as_str()
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = csv_header(SUMMARY_COLUMNS);
        let _ = writeln!(out, "{}", self.summary.csv_row());
        out
    }
}

/// Column list of `summary.csv`, shared with sweep output.
pub const SUMMARY_COLUMNS: &str =
    "duration_s,seed,devices,locations,fog_nodes,generated,completed,completed_local,\
     completed_leased,completed_cloud,dropped,dropped_loss,dropped_coverage,rejected,\
     in_flight,handovers,supported_users,mean_latency_s,p95_latency_s,total_energy_j";

impl RunSummary {
    /// One CSV row matching [`SUMMARY_COLUMNS`].
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.duration_s,
            self.seed,
            self.devices,
            self.locations,
            self.fog_nodes,
            self.generated,
            self.completed,
            self.completed_local,
            self.completed_leased,
            self.completed_cloud,
            self.dropped,
            self.dropped_loss,
            self.dropped_coverage,
            self.rejected,
            self.in_flight,
            self.handovers,
            self.supported_users,
            self.mean_latency_s,
            self.p95_latency_s,
            self.total_energy_j
        )
    }
}

fn csv_header(columns: &str) -> String {
    format!("# schema_version = {SCHEMA_VERSION}\n{columns}\n")
}

/// Writes `intervals.csv`, `latency.csv`, and `summary.csv` into `out_dir`,
/// creating it if needed. Returns the written paths.
pub fn emit_csv(report: &MetricsReport, out_dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(out_dir)
        .map_err(|source| ReportError::Io { path: out_dir.to_path_buf(), source })?;
    let files = [
        ("intervals.csv", report.intervals_csv()),
        ("latency.csv", report.latency_csv()),
        ("summary.csv", report.summary_csv()),
    ];
    let mut written = Vec::new();
    for (name, content) in files {
        let path = out_dir.join(name);
        fs::write(&path, content)
            .map_err(|source| ReportError::Io { path: path.clone(), source })?;
        written.push(path);
    }
    Ok(written)
}

/// p95 over a latency sample set; 0 when empty.
pub fn p95(latencies: &[f64]) -> f64 {
    if latencies.is_empty() {
        return 0.0;
    }
    let mut sorted = latencies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((0.95 * sorted.len() as f64).ceil() as usize).max(1) - 1;
    sorted[rank.min(sorted.len() - 1)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_emits_headers_only() {
        let report = MetricsReport::default();
        let csv = report.intervals_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("# schema_version = 1"));
        assert!(lines.next().unwrap().starts_with("t,node_id,"));
        assert_eq!(lines.next(), None);
        assert_eq!(report.latency_csv().lines().count(), 2);
        assert_eq!(report.summary_csv().lines().count(), 3);
    }

    #[test]
    fn identical_reports_serialize_identically() {
        let mut report = MetricsReport::default();
        report.intervals.push(MetricsRecord {
            t_s: 5.0,
            node_id: 3,
            utilization: 0.125,
            queue_len: 2,
            completed: 7,
            mean_latency_s: 0.1 + 0.2, // exercise a non-terminating decimal
            energy_j: 312.5,
        });
        assert_eq!(report.intervals_csv(), report.clone().intervals_csv());
    }

    #[test]
    fn numeric_cells_round_trip() {
        let values = [0.1 + 0.2, 1.0 / 3.0, 1e-12, 123456.789, f64::MIN_POSITIVE];
        for v in values {
            let cell = format!("{v}");
            assert_eq!(cell.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn p95_picks_rank() {
        let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(p95(&xs), 95.0);
        assert_eq!(p95(&[]), 0.0);
        assert_eq!(p95(&[2.0]), 2.0);
    }

    #[test]
    fn conservation_identity() {
        let s = RunSummary {
            generated: 10,
            completed: 6,
            dropped: 2,
            rejected: 1,
            in_flight: 1,
            ..RunSummary::default()
        };
        assert!(s.conservation_holds());
        let bad = RunSummary { generated: 11, ..s };
        assert!(!bad.conservation_holds());
    }
}
