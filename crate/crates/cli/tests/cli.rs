use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn gaudin(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gaudin"));
    cmd.args(args);
    for var in ["GAUDIN_TOL_CLUSTER", "GAUDIN_TOL_RESIDUAL", "GAUDIN_TOL_KERNEL"] {
        cmd.env_remove(var);
    }
    cmd.envs(env.iter().copied());
    cmd.output().expect("binary runs")
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("config.json");
    fs::write(&path, text).unwrap();
    path
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn schubert_prints_the_number() {
    for (m, l, want) in [("1,1", "1", "1"), ("1,1,1,1", "2", "2"), ("1,2", "2", "0"), ("1,1,1", "1", "2")] {
        let out = gaudin(&["schubert", "--m", m, "--l", l], &[]);
        assert!(out.status.success());
        assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), want);
    }
}

#[test]
fn spectrum_to_stdout() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, r#"{"m":[1,1],"l":1,"z":[0,1]}"#);
    let out = gaudin(&["spectrum", "--config", cfg.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["sing_l"]["points"][0]["h"], serde_json::json!(["-2", "2"]));
    assert!(report.get("timing_ms").is_none());
}

#[test]
fn spectrum_to_file_with_timing() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, r#"{"m":[1,1,1],"l":1,"z":[0,1,2],"mode":"float"}"#);
    let dest = dir.path().join("report.json");
    let out = gaudin(
        &["spectrum", "--config", cfg.to_str().unwrap(), "--out", dest.to_str().unwrap(), "--timing"],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&fs::read_to_string(dest).unwrap()).unwrap();
    assert_eq!(report["sing_l"]["points"].as_array().unwrap().len(), 2);
    assert_eq!(report["all_simple"], Value::Bool(true));
    assert!(report["timing_ms"].is_object());
}

#[test]
fn impossible_gate_fails_with_names_on_stderr() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, r#"{"m":[2,1,2],"l":2,"z":[[0,0],[1,0.5],[-1,1]],"mode":"float"}"#);
    let out = gaudin(&["spectrum", "--config", cfg.to_str().unwrap()], &[("GAUDIN_TOL_RESIDUAL", "1e-300")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.lines().any(|l| l.starts_with("failed: ")), "{err}");
    let report = stdout_json(&out);
    assert_eq!(report["passed"], Value::Bool(false));
    assert_eq!(report["instance"]["tolerances"]["residual"], serde_json::json!(1e-300));
}

#[test]
fn bad_configs_are_errors() {
    let dir = TempDir::new().unwrap();
    for text in [
        r#"{"m":[1,1],"l":1,"z":["1/2","2/4"]}"#,
        r#"{"m":[1,1],"l":1,"z":[0,1],"colour":"red"}"#,
        r#"{"m":[1,1],"l":1,"z":[0]}"#,
        "not json",
    ] {
        let cfg = write_config(&dir, text);
        let out = gaudin(&["spectrum", "--config", cfg.to_str().unwrap()], &[]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    }
    let out = gaudin(&["spectrum", "--config", "/nonexistent/config.json"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_tolerance_variable_is_an_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, r#"{"m":[1,1],"l":1,"z":[0,1]}"#);
    let out = gaudin(&["spectrum", "--config", cfg.to_str().unwrap()], &[("GAUDIN_TOL_KERNEL", "tiny")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_counts_agree() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, r#"{"m":[1,1,1],"l":1,"z":[0,1,2],"seed":5}"#);
    let out = gaudin(&["verify", "--config", cfg.to_str().unwrap(), "--samples", "4"], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["counts_l"], serde_json::json!([2, 2, 2, 2]));
    assert_eq!(report["counts_m"], serde_json::json!([2, 2, 2, 2]));
}

#[test]
fn verify_rejects_zero_samples() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, r#"{"m":[1,1],"l":1,"z":[0,1]}"#);
    let out = gaudin(&["verify", "--config", cfg.to_str().unwrap(), "--samples", "0"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exact_output_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, r#"{"m":[2,1,1,1],"l":2,"z":["-1","1/2","3","5/3"],"seed":3}"#);
    let a = gaudin(&["spectrum", "--config", cfg.to_str().unwrap()], &[]);
    let b = gaudin(&["spectrum", "--config", cfg.to_str().unwrap()], &[]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn shipped_configs_pass() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        let out = gaudin(&["spectrum", "--config", path.to_str().unwrap()], &[]);
        assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
    }
}
