//! End-to-end checks of the command-line interface: artifacts, exit
//! codes, and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dprd-sim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

#[test]
fn simulate_writes_artifacts_and_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "short.json", r#"{"horizon_slots": 3}"#);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let output = run(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
        assert!(out.join("slots.csv").exists());
        assert!(out.join("summary.json").exists());
    }
    let a = std::fs::read(out_a.join("slots.csv")).unwrap();
    let b = std::fs::read(out_b.join("slots.csv")).unwrap();
    assert_eq!(a, b, "slot CSV must be byte-identical across runs");
}

#[test]
fn bundled_baseline_scenario_loads_and_runs() {
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/paper_baseline.json");
    let dir = tempfile::tempdir().unwrap();
    // shorten the horizon via a copy so the test stays fast
    let mut config: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&scenario).unwrap()).unwrap();
    config["horizon_slots"] = 2.into();
    let short = write_config(dir.path(), "baseline_short.json", &config.to_string());
    let output = run(&[
        "simulate",
        "--config",
        short.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write_config(dir.path(), "bad.json", "{ not json");
    let unknown_key = write_config(dir.path(), "unknown.json", r#"{"no_such_field": 1}"#);
    let invalid = write_config(dir.path(), "invalid.json", r#"{"p_max_mw": -5.0}"#);
    for config in [&bad_json, &unknown_key, &invalid] {
        let output = run(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(
            output.status.code(),
            Some(2),
            "{}: {}",
            config.display(),
            String::from_utf8_lossy(&output.stderr)
        );
    }
}

#[test]
fn infeasible_scenario_exits_3_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    // the sending-delay cap is unreachable at any admissible power
    let config = write_config(
        dir.path(),
        "infeasible.json",
        r#"{"horizon_slots": 3, "d_max_trans_s": 1e-6}"#,
    );
    let output = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3));
    assert!(dir.path().join("slots.csv").exists(), "partial output still written");
}

#[test]
fn oracle_check_writes_gap_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "short.json",
        // a sparse grid keeps the exhaustive search fast
        r#"{"horizon_slots": 2, "oracle_grid": {"lambda_min": 1, "lambda_max": 8, "qp_min": 18, "qp_max": 42, "pt_samples": 40}}"#,
    );
    let output = run(&[
        "oracle-check",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("gap_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["slots"], 2);
    assert!(report["max_gap"].as_f64().is_some());
}

#[test]
fn sweep_writes_long_format_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "short.json", r#"{"horizon_slots": 2}"#);
    let spec = write_config(
        dir.path(),
        "spec.json",
        r#"{"axes": [["d_max", [2.9, 3.0]], ["d_max_trans", [0.02]]]}"#,
    );
    let output = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3, "header plus one row per cell");
    assert!(lines[0].starts_with("d_max,d_max_trans,"));
}

#[test]
fn fit_subcommand_round_trips_samples() {
    let dir = tempfile::tempdir().unwrap();
    // no sample files at all is a usage error
    let output = run(&["fit", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));

    let mut rows = String::from("q,dcoe\n");
    for i in 0..30 {
        let q = 5.0 + 7.0 * i as f64;
        rows.push_str(&format!("{q},{}\n", 0.01 * (285.0 * (-0.15 * q).exp() + 0.25)));
    }
    let dcoe = dir.path().join("dcoe.csv");
    std::fs::write(&dcoe, rows).unwrap();
    let output = run(&[
        "fit",
        "--dcoe-csv",
        dcoe.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fit.json")).unwrap())
            .unwrap();
    let d3 = report["dcoe"]["d3"].as_f64().unwrap();
    assert!((d3 - 0.15).abs() / 0.15 < 1e-4, "d3 {d3}");

    // malformed samples are a usage error
    std::fs::write(&dcoe, "q,dcoe\noops,1\n").unwrap();
    let output = run(&[
        "fit",
        "--dcoe-csv",
        dcoe.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}
