use std::path::Path;
use std::process::{Command, Output};

use conic_approx::harness::Table;

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conic-approx")).current_dir(dir).args(args).output().unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_subset_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"checks": ["jacobi_orthonormality", "cutoff_admissibility"]}"#);
    let out = cli(dir.path(), &["verify", "--config", &config, "--out", "results"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS  jacobi_orthonormality"));
    let results = dir.path().join("results");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(results.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["records"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(results.join("jacobi_orthonormality.csv")).unwrap();
    assert!(csv.starts_with("quantity,index,value\n"));
    let table = Table::from_csv("jacobi_orthonormality", &csv).unwrap();
    assert_eq!(table.to_csv().unwrap(), csv);
}

#[test]
fn zero_tolerance_fails_with_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"checks": ["jacobi_orthonormality"], "tolerances": {"jacobi_orthonormality": 0.0}}"#,
    );
    let mut reports = Vec::new();
    for out_dir in ["a", "b"] {
        let out = cli(dir.path(), &["verify", "--config", &config, "--out", out_dir]);
        assert_eq!(out.status.code(), Some(1));
        let text = std::fs::read_to_string(dir.path().join(out_dir).join("report.json")).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v.as_object_mut().unwrap().remove("timing");
        reports.push(v);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for json in [r#"{"functions": ["no_such_function"]}"#, r#"{"colour": "blue"}"#, r#"{"checks": ["nope"]}"#] {
        let config = write_config(dir.path(), json);
        let out = cli(dir.path(), &["verify", "--config", &config]);
        assert_eq!(out.status.code(), Some(2), "{json}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(cli(dir.path(), &["verify", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(cli(dir.path(), &["plot"]).status.code(), Some(2));
    assert_eq!(cli(dir.path(), &["verify", "--format", "xml"]).status.code(), Some(2));
    let missing = cli(dir.path(), &["verify", "--config", "missing.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn json_format_writes_json_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config =
        write_config(dir.path(), r#"{"domain": "interval", "d": 1, "degrees": [4, 8], "functions": ["smooth"]}"#);
    let out = cli(dir.path(), &["modulus", "--config", &config, "--format", "json", "--seed", "7"]);
    assert_ne!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let names: Vec<String> = std::fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert!(names.iter().any(|n| n == "report.json"));
    assert!(names.iter().filter(|n| *n != "report.json").all(|n| n.ends_with(".json")));
    assert!(names.len() > 1);
    let report = std::fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["config"]["seed"], 7);
}
