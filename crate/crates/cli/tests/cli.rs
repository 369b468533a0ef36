use std::fs;
use std::process::{Command, Output};

fn heavenly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heavenly")).args(args).output().expect("binary runs")
}

#[test]
fn evolve_writes_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = dir.path().join("report.json");
    let status = heavenly(&[
        "evolve",
        "--flow",
        "mp-y",
        "--init",
        "0.1*sin(x)",
        "--grid",
        "64",
        "--dt",
        "1e-2",
        "--T",
        "0.1",
        "--csv",
        csv.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
    .status;
    assert_eq!(status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,H0,momentum,mass,min_v,max_v"));
    assert_eq!(lines.count(), 11);
    let reports: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let checks: Vec<&str> = reports.as_array().unwrap().iter().map(|r| r["check"].as_str().unwrap()).collect();
    let mut sorted = checks.clone();
    sorted.sort();
    assert_eq!(checks, sorted);
    assert!(checks.contains(&"mp_y_h0_drift"));
}

#[test]
fn bracket_table_csv_has_closed_form_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("kernel.csv");
    let out = heavenly(&["bracket-table", "--case", "mp", "--grid", "32", "--p", "0", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t1_0,t2_0,numeric,closed_form\n"));
    assert_eq!(text.lines().count(), 1 + 4 * 32);
}

#[test]
fn parse_errors_are_usage_errors() {
    let out = heavenly(&["lax-check", "--field", "sin(x", "--grid", "16"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position 5"));
    assert_eq!(heavenly(&["lax-check", "--field", "sin(q)", "--grid", "16"]).status.code(), Some(2));
}

#[test]
fn mp_only_suites_reject_plebanski() {
    assert_eq!(heavenly(&["verify", "poisson", "--case", "plebanski"]).status.code(), Some(2));
    assert_eq!(heavenly(&["evolve", "--case", "plebanski"]).status.code(), Some(2));
    assert_eq!(heavenly(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn failing_check_exits_one() {
    // the inverse formula is exact only at constant slope
    let out = heavenly(&["verify", "inverse", "--grid", "64"]);
    assert_eq!(out.status.code(), Some(1));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let pass: Vec<bool> = reports.as_array().unwrap().iter().map(|r| r["pass"].as_bool().unwrap()).collect();
    assert_eq!(pass, vec![true, false]);
}

#[test]
fn show_defaults_is_versioned() {
    let out = heavenly(&["--show-defaults"]);
    assert_eq!(out.status.code(), Some(0));
    let table: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(table["version"], 1);
    assert_eq!(table["evolve_dt"], 1e-3);
}

#[test]
fn plebanski_lax_check_with_field() {
    let out =
        heavenly(&["lax-check", "--case", "plebanski", "--field", "sin(x1)*cos(x2+y)+exp(sin(t))", "--grid", "16"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
