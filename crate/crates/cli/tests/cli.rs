//! End-to-end checks of the binary's subcommands and exit codes.

use std::fs;
use std::path::Path;
use std::process::Command;

fn fogfed() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fogfed"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const SMALL: &str = "[topology]\n\
    locations = 2\n\
    nodes_per_location = 1\n\
    access_points = 6\n\
    arena_size_m = 400\n\
    [workload]\n\
    devices = 8\n\
    [mobility]\n\
    circular_radius_m = 50\n\
    [run]\n\
    duration_s = 20\n";

#[test]
fn validate_accepts_bundled_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ok.cfg", SMALL);
    let out = fogfed().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}

#[test]
fn validate_rejects_bad_config_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "[run]\nduration_s = 0\n");
    let out = fogfed().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duration must be positive"));
}

#[test]
fn missing_config_file_is_a_runtime_error() {
    let out = fogfed()
        .args(["validate", "--config", "/nonexistent/nope.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_three_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", SMALL);
    let out_dir = dir.path().join("out");
    let out = fogfed()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--seed", "3", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["intervals.csv", "latency.csv", "summary.csv"] {
        let content = fs::read_to_string(out_dir.join(name)).unwrap();
        assert!(content.starts_with("# schema_version = 1\n"), "{name} lacks version line");
    }
}

#[test]
fn simulate_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", SMALL);
    let run = |out: &Path| {
        let st = fogfed()
            .args(["simulate", "--config"])
            .arg(&cfg)
            .args(["--seed", "9", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(st.success());
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&a);
    run(&b);
    for name in ["intervals.csv", "latency.csv", "summary.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
    }
}

#[test]
fn sweep_writes_combined_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", SMALL);
    let out_dir = dir.path().join("sweep");
    let out = fogfed()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--param", "interarrival=0.5,1.5", "--seeds", "1,2", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let combined = fs::read_to_string(out_dir.join("sweep_summary.csv")).unwrap();
    assert_eq!(combined.lines().count(), 2 + 4);
    assert!(out_dir.join("interarrival=0.5/seed=1/summary.csv").exists());
}

#[test]
fn sweep_unknown_parameter_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", SMALL);
    let out = fogfed()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--param", "voltage=1,2", "--seeds", "1", "--out"])
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn compare_reports_both_arms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", SMALL);
    let out_dir = dir.path().join("cmp");
    let out = fogfed()
        .args(["compare", "--config"])
        .arg(&cfg)
        .args(["--budget", "inf", "--seeds", "1", "--step", "4", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("compare_summary.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert_eq!(last, "1,inf,8,8");
}
