use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nalgebra::DVector;
use serde_json::Value;
use tempered_core::{chua_linearized, homogeneous_state, ChuaParams};

fn tempered(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tempered")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn write_system(dir: &Path, b: &str) -> String {
    let path = dir.join("sys.json");
    let text = format!(
        r#"{{"alpha": 0.7, "rho": 0.5, "A": [[-2.0, 2.0, 0.0], [1.0, -1.0, 1.0], [0.0, -0.5, 0.0]], "B": {b}}}"#
    );
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn simulate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = tempered(&["simulate", "--model", "chua", "--T", "1", "--grid-n", "64", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,y1,y2,y3"));
    assert_eq!(lines.count(), 65);
    assert!(dir.path().join("trajectory.svg").exists());
    let s = read_json(&dir.path().join("simulate.json"));
    assert_eq!(s["grid_steps"], 64);
}

#[test]
fn format_selection_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = tempered(&["simulate", "--model", "chua", "--grid-n", "32", "--format", "json", "--out", &out]);
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("simulate.json").exists());
    assert!(!dir.path().join("trajectory.csv").exists());
    assert!(!dir.path().join("trajectory.svg").exists());
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let cases: Vec<Vec<&str>> = vec![
        vec!["simulate", "--model", "chua", "--alpha", "1.5", "--out", &out],
        vec!["simulate", "--model", "chua", "--y0", "1,2", "--out", &out],
        vec!["simulate", "--out", &out],
        vec!["steer", "--model", "chua", "--alpha", "0.4", "--out", &out],
        vec!["simulate", "--model", "chua", "--T", "-1", "--out", &out],
        vec!["simulate", "--model", "chua-hartley", "--gamma", "1", "--out", &out],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = tempered(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn malformed_system_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"alpha": 0.7, "rho": 0.5, "A": [[1.0, 2.0]], "B": [[1.0]]}"#).unwrap();
    let o = tempered(&["simulate", "--system", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn io_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json").display().to_string();
    let o = tempered(&["simulate", "--system", &missing, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 4);

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = tempered(&["simulate", "--model", "chua", "--grid-n", "16", "--out", blocker.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
}

#[test]
fn zero_input_matrix_is_not_controllable() {
    let dir = tempfile::tempdir().unwrap();
    let sys = write_system(dir.path(), "[[0.0], [0.0], [0.0]]");
    let out = dir.path().display().to_string();
    let o = tempered(&["analyze", "--system", &sys, "--quad-n", "64", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("analysis.json"));
    assert_eq!(r["verdicts"]["controllable_kalman"], false);
    assert_eq!(r["verdicts"]["controllable_gramian"], false);
    assert_eq!(r["kalman_controllability"]["verdict"], "not_controllable");
    assert!(String::from_utf8_lossy(&o.stdout).contains("not controllable"));

    // steering needs an invertible Gramian
    let o = tempered(&["steer", "--system", &sys, "--target", "1,1,1", "--quad-n", "64", "--out", &out]);
    assert_eq!(code(&o), 3);
}

#[test]
fn analyze_low_order_reports_gramian_unavailable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = tempered(&["analyze", "--model", "chua", "--alpha", "0.4", "--T", "0.1", "--quad-n", "64", "--out", &out]);
    assert_eq!(code(&o), 0);
    let r = read_json(&dir.path().join("analysis.json"));
    assert!(r["controllability_gramian"]["error"].is_string());
    assert!(r["verdicts"]["controllable_gramian"].is_null());
    assert_eq!(r["verdicts"]["observable_gramian"], true);
}

#[test]
fn free_response_target_needs_no_control() {
    let sys = chua_linearized(&ChuaParams::default(), 0.7, 0.5).unwrap();
    let y0 = DVector::from_vec(vec![2.0, 5.0, 3.0]);
    let free = homogeneous_state(&sys, &y0, 1.5).unwrap();
    let target: Vec<String> = free.iter().map(|v| format!("{v:.17e}")).collect();
    let target = target.join(",");

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = tempered(&["steer", "--model", "chua", "--target", &target, "--grid-n", "192", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("control.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("tau,u1"));
    let umax = lines
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap().abs())
        .fold(0.0, f64::max);
    assert!(umax < 1e-8, "control magnitude {umax}");
    let s = read_json(&dir.path().join("steering.json"));
    assert!(s["report"]["rel_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn steer_default_case_closes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = tempered(&["steer", "--model", "chua", "--out", &out]);
    assert_eq!(code(&o), 0);
    let s = read_json(&dir.path().join("steering.json"));
    assert!(s["report"]["rel_error"].as_f64().unwrap() <= 1e-2);
    for f in ["control.csv", "trajectory.csv", "control.svg", "trajectory.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn reproduce_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = tempered(&["reproduce", "--grid-n", "96", "--quad-n", "64", "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    assert!(sa.iter().any(|(n, _)| n == "summary.json"));
    assert_eq!(sa, sb);
    let s = read_json(&a.path().join("summary.json"));
    assert_eq!(s["verdicts"]["chua_controllable"], true);
    assert_eq!(s["verdicts"]["chua_hartley_observable"], true);
    assert_eq!(s["steering"].as_array().unwrap().len(), 2);
}
