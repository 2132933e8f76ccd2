use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn ranslice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ranslice")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_clean_set_exits_zero() {
    let out = ranslice(&["validate", "--descriptors", path(&data("two-slice-s4"))]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok:"));
}

#[test]
fn validate_findings_exit_one() {
    let out = ranslice(&["validate", "--descriptors", path(&data("corpus/03-missing-aux-nsd.toml"))]);
    assert_eq!(out.status.code(), Some(1));
    let out = ranslice(&["validate", "--descriptors", path(&data("corpus/27-syntax-error.toml"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_exits_two() {
    let out = ranslice(&["validate", "--descriptors", "/nonexistent/descriptors.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_trace_to_stdout() {
    let out = ranslice(&[
        "simulate",
        "--descriptors",
        path(&data("two-slice-s4")),
        "--config",
        path(&data("sim/two-slice-s4.toml")),
        "--ticks",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "tick,slice,prbs,du_util,cu_util,vnic_wait_ms,admitted,rejected,vm_count,event");
    assert_eq!(lines.len(), 1 + 5 * 2);
}

#[test]
fn simulate_json_and_summary_files() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let summary = dir.path().join("s.csv");
    let out = ranslice(&[
        "simulate",
        "--descriptors",
        path(&data("two-slice-s4")),
        "--config",
        path(&data("sim/two-slice-s4.toml")),
        "--scenario",
        "s1",
        "--ticks",
        "12",
        "--format",
        "json",
        "--out",
        json.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let result = ranslice_core::sim::result_from_json(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(result.trace.len(), 12);
    assert_eq!(result.summary.scenario, ranslice_core::Scenario::S1Dedicated);
    assert!(fs::read_to_string(&summary).unwrap().lines().nth(1).unwrap().starts_with("s1,12,"));
}

#[test]
fn seed_override_changes_the_run() {
    let run = |seed: &str| {
        ranslice(&[
            "simulate",
            "--descriptors",
            path(&data("two-slice-s4")),
            "--config",
            path(&data("sim/two-slice-s4.toml")),
            "--ticks",
            "40",
            "--seed",
            seed,
        ])
        .stdout
    };
    assert_eq!(run("5"), run("5"));
    assert_ne!(run("5"), run("6"));
}

#[test]
fn compare_emits_one_row_per_scenario() {
    let out = ranslice(&[
        "compare",
        "--descriptors",
        path(&data("two-slice-s4")),
        "--config",
        path(&data("sim/two-slice-s4.toml")),
        "--ticks",
        "20",
        "--scenarios",
        "s1,s2,s4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let scenarios: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(scenarios, ["s1", "s2", "s4"]);
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    fs::write(&config, "scenario = \"s9\"\nticks = 1\ntotal_prbs = 10\n").unwrap();
    let out =
        ranslice(&["simulate", "--descriptors", path(&data("two-slice-s4")), "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn calibrate_prints_a_resource_section() {
    let dir = tempfile::tempdir().unwrap();
    let anchors = dir.path().join("a.toml");
    fs::write(
        &anchors,
        "beta = 0.35\n\n[[anchor]]\nprbs = 50\nmodulation_order = 4\ncode_rate = 0.5\nobserved = 0.3\n\n\
         [[anchor]]\nprbs = 200\nmodulation_order = 4\ncode_rate = 0.5\nobserved = 0.9\n",
    )
    .unwrap();
    let out = ranslice(&["calibrate", "--anchors", anchors.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let section: toml::Table = toml::from_str(&text).unwrap();
    let resource = section["resource"].as_table().unwrap();
    // Two anchors: exact fit, c0 = 0.3 - 50 * slope.
    let slope = 0.6 / 150.0;
    assert!((resource["c0"].as_float().unwrap() - (0.3 - 50.0 * slope)).abs() < 1e-12);
    let k = slope / (0.5 * (0.35f64 * 4.0).exp());
    assert!((resource["k"].as_float().unwrap() - k).abs() < 1e-15);
}

/// Regenerate with
/// `ranslice simulate --descriptors data/two-slice-s4 --config data/sim/two-slice-s4.toml --ticks 30`.
#[test]
fn trace_matches_golden_file() {
    let out = ranslice(&[
        "simulate",
        "--descriptors",
        path(&data("two-slice-s4")),
        "--config",
        path(&data("sim/two-slice-s4.toml")),
        "--ticks",
        "30",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let golden = fs::read_to_string(data("golden/two-slice-s4-30ticks.csv")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
}
