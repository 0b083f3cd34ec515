//! End-to-end tests of the `vodsim` binary: output formats, config
//! handling, exit codes, and CSV cross-checks against the engine.

use std::path::Path;
use std::process::{Command, Output};

use vodsim_core::engine::{run as engine_run, SimConfig};

fn vodsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vodsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn analytic_erlang_prints_six_significant_digits() {
    let out = vodsim(&["analytic", "erlang", "--load", "2", "--ports", "2"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("blocking_probability = 0.400000"), "{}", stdout(&out));
}

#[test]
fn analytic_capacity_matches_worked_case() {
    let out = vodsim(&[
        "analytic", "capacity", "--p0", "100", "--c1", "10", "--lambda", "0.5", "--level", "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("capacity_closed = 82.5000"), "{text}");
    assert!(text.contains("capacity_iterative = 82.5000"), "{text}");
}

#[test]
fn analytic_active_peers_matches_enumeration() {
    let out = vodsim(&["analytic", "active-peers", "--n", "4", "--k", "2", "--rho", "0.5"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("activity_tail = 0.312500"), "{}", stdout(&out));
}

#[test]
fn analytic_khintchine_brackets_enumerated_mean() {
    let out = vodsim(&["analytic", "khintchine", "--rates", "1,1,1,1", "--p", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("lower_bound = 1.41421"), "{text}");
    assert!(text.contains("upper_bound = 2.00000"), "{text}");
    assert!(text.contains("enumerated_mean_abs = 1.50000"), "{text}");
}

#[test]
fn analytic_admission_caps_by_disk_and_threshold() {
    let out = vodsim(&["analytic", "admission", "--disk", "4000", "--eta", "10", "--playback", "600"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("max_streams = 6"), "{}", stdout(&out));

    let out = vodsim(&["analytic", "admission", "--disk", "10000", "--eta", "20", "--playback", "400"]);
    assert!(stdout(&out).contains("max_streams = 20"), "{}", stdout(&out));
}

#[test]
fn analytic_rejects_invalid_arguments_with_exit_1() {
    let out = vodsim(&["analytic", "erlang", "--load=-1", "--ports", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("invalid argument"), "{}", stderr(&out));
}

#[test]
fn unknown_subcommand_exits_1() {
    let out = vodsim(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    let out = vodsim(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "levels=15\nadjacency_size=7\n").unwrap();
    let out = vodsim(&["run", "--config", path.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("adjacency_size"), "{err}");
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "port_count=10\n").unwrap();
    let out = vodsim(&["topology", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown key 'port_count'"), "{}", stderr(&out));
}

#[test]
fn flag_override_beats_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seeded.conf");
    std::fs::write(&path, "seed=3\nsim_time=30\narrival_rates=0.0\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = vodsim(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--set",
        "seed=42",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(doc["seed"], 42);
    assert_eq!(doc["config"]["sim_time_s"], 30.0);
}

#[test]
fn zero_rate_run_emits_header_only_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = vodsim(&[
        "run",
        "--set",
        "arrival_rates=0,0",
        "--set",
        "sim_time=10",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let requests = std::fs::read_to_string(out_dir.join("requests.csv")).unwrap();
    assert_eq!(requests, "t,cumulative_requests\n");
    let hops = std::fs::read_to_string(out_dir.join("hops.csv")).unwrap();
    assert_eq!(hops, "adjacency_size,hop_count,frequency\n");
}

#[test]
fn hops_csv_mass_matches_engine_found_count() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = vodsim(&[
        "run",
        "--set",
        "sim_time=120",
        "--set",
        "seed=5",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let config = SimConfig { sim_time_s: 120.0, seed: 5, ..SimConfig::default() };
    let report = engine_run(&config).unwrap();

    let hops = std::fs::read_to_string(out_dir.join("hops.csv")).unwrap();
    let mass: u64 = hops
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(mass, report.found_searches());
    // Every cache-miss search is accounted for: found, failed, or cut off
    // by the horizon.
    assert!(report.found_searches() + report.failed_searches <= report.cache_miss_searches);
}

#[test]
fn topology_json_has_default_node_count() {
    let out = vodsim(&["topology", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["nodes"].as_array().unwrap().len(), 58);
    assert_eq!(doc["levels"], 15);
    assert!(doc["links"].as_array().unwrap().len() > 100);
    assert!(!doc["clusters"].as_array().unwrap().is_empty());
}

#[test]
fn topology_rejects_unknown_format() {
    let out = vodsim(&["topology", "--format", "yaml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown export format"), "{}", stderr(&out));
}

#[test]
fn search_reports_not_found_with_exit_0() {
    // A one-probe session cannot cover a chunk placed nowhere nearby.
    let out = vodsim(&[
        "search",
        "--asset",
        "0",
        "--chunk",
        "0",
        "--set",
        "session_duration=0.01",
        "--set",
        "share_fraction=0.001",
        "--set",
        "seed=3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("found") || text.starts_with("not_found"), "{text}");
}

#[test]
fn search_rejects_out_of_catalog_asset() {
    let out = vodsim(&["search", "--asset", "99", "--chunk", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_into_unwritable_directory_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = vodsim(&[
        "run",
        "--set",
        "sim_time=5",
        "--out-dir",
        blocker.join("nested").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_manifest_echoes_trials_and_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = vodsim(&[
        "sweep",
        "--sizes",
        "2,5",
        "--trials",
        "150",
        "--set",
        "seed=8",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["trials"], 150);
    assert_eq!(manifest["sizes"], serde_json::json!([2, 5]));

    let summary = std::fs::read_to_string(out_dir.join("hops_summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "adjacency_size,trials,found,not_found,mean,variance");
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[1], "150");
    }
}

#[test]
fn validate_exits_2_when_tolerance_is_unreachable() {
    let out = vodsim(&["validate", "--tolerance", "0.000000001"]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("erlang_blocking"), "{text}");
    assert!(text.contains("FAIL"), "{text}");
}

fn read_dir_names(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn placement_flag_writes_audit_json() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = vodsim(&[
        "run",
        "--set",
        "sim_time=5",
        "--set",
        "asset_count=2",
        "--set",
        "asset_duration=3",
        "--placement",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let placement: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("placement.json")).unwrap())
            .unwrap();
    // Node 0 is the archive and holds every chunk: 2 assets x 3 GOPs.
    assert_eq!(placement["0"].as_array().unwrap().len(), 6);
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("placement.json"));
}

#[test]
fn run_emits_expected_artifact_set() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = vodsim(&[
        "run",
        "--set",
        "sim_time=20",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        read_dir_names(&out_dir),
        vec!["blocking.csv", "hops.csv", "manifest.json", "requests.csv", "throughput.csv"]
    );
}
