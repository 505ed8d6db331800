use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bpdq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bpdq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn noise_bound_reports_radius() {
    let out = bpdq(&["noise-bound", "--p", "4", "--m", "100", "--alpha", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    let expect = bpdq::quantize::epsilon_p(4.0, 100, 1.0, 2.0).unwrap().epsilon;
    assert!((v["epsilon"].as_f64().unwrap() - expect).abs() < 1e-12);

    let out = bpdq(&["noise-bound", "--p", "inf", "--m", "10", "--alpha", "0.5"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["p"], "inf");
    assert_eq!(v["epsilon"].as_f64().unwrap(), 0.25);
}

#[test]
fn constants_match_library() {
    let out = bpdq(&["constants", "--p", "2", "--delta-2k", "0.2"]);
    assert!(out.status.success());
    let v = json(&out);
    let (a, b) = bpdq::theory::theorem1_constants(0.2).unwrap();
    assert_eq!(v["theorem1"]["A"].as_f64().unwrap(), a);
    assert_eq!(v["theorem1"]["B"].as_f64().unwrap(), b);
}

#[test]
fn rip_probe_exact_bounds_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("op.json");
    let gen = bpdq(&["gen", "matrix", "--m", "8", "--N", "12", "--seed", "3", "--out", path(&spec)]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    let exact = json(&bpdq(&["rip-probe", "--matrix-spec", path(&spec), "--K", "2", "--exact"]));
    let mc = json(&bpdq(&["rip-probe", "--matrix-spec", path(&spec), "--K", "2", "--trials", "200"]));
    let d_exact = exact["delta"].as_f64().unwrap();
    let d_mc = mc["deltas"]["2"].as_f64().unwrap();
    assert!(d_mc <= d_exact + 1e-12, "{d_mc} > {d_exact}");
}

#[test]
fn decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("op.json");
    let sig = dir.path().join("x.csv");
    assert!(bpdq(&["gen", "matrix", "--m", "40", "--N", "80", "--seed", "5", "--out", path(&spec)]).status.success());
    assert!(bpdq(&["gen", "signal", "--N", "80", "--K", "3", "--seed", "2", "--out", path(&sig)]).status.success());

    let op_spec: bpdq::sensing::OperatorSpec = serde_json::from_str(&fs::read_to_string(&spec).unwrap()).unwrap();
    let op = bpdq::sensing::LinearOperator::from_spec(&op_spec).unwrap();
    let x = bpdq::experiments::gen_sparse_signal(80, 3, 2).unwrap();
    let y = op.apply(&x);
    let meas = dir.path().join("y.csv");
    fs::write(&meas, y.iter().map(|v| format!("{v:e}\n")).collect::<String>()).unwrap();

    let out = bpdq(&["decode", "--matrix-spec", path(&spec), "--measurements", path(&meas)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["converged"], true);
    let x_hat: Vec<f64> = v["x_hat"].as_array().unwrap().iter().map(|e| e.as_f64().unwrap()).collect();
    assert!(bpdq::experiments::snr_db(&x, &x_hat) > 60.0);
}

#[test]
fn mismatched_measurements_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("op.json");
    assert!(bpdq(&["gen", "matrix", "--m", "10", "--N", "20", "--out", path(&spec)]).status.success());
    let meas = dir.path().join("y.csv");
    fs::write(&meas, "1\n2\n3\n").unwrap();
    let out = bpdq(&["decode", "--matrix-spec", path(&spec), "--measurements", path(&meas)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"trials": 0}"#).unwrap();
    let out = bpdq(&["exp1d", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(&cfg, r#"{"no_such_field": 1}"#).unwrap();
    let out = bpdq(&["exp1d", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(&cfg, r#"{"p_list": [1.5]}"#).unwrap();
    let out = bpdq(&["exp1d", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failure_budget_exit_3() {
    // a single outer iteration with tiny inner caps cannot converge
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"N": 64, "K": 2, "m_over_K": [8], "p_list": [4], "trials": 2, "failure_budget": 0,
            "decoder": {"outer_iters": 1, "inner_cap": 1, "final_cap": 1}}"#,
    )
    .unwrap();
    let out = bpdq(&["exp1d", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn small_sweep_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"N": 64, "K": 2, "m_over_K": [8, 16], "p_list": [2, 4], "trials": 2, "seed": 9,
            "decoder": {"outer_iters": 100}}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("run");
    let out = bpdq(&["exp1d", "--config", path(&cfg), "--out", path(&out_dir), "--raw"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4);
    assert!(summary.starts_with("m_over_K,m,p,trials"));
    let trials = fs::read_to_string(out_dir.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 8);
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 9);
    assert_eq!(manifest["config"]["p_list"], serde_json::json!([2.0, 4.0]));
}

#[test]
fn gen_angiogram_is_binary() {
    let out = bpdq(&["gen", "angiogram", "--side", "32", "--ellipses", "3", "--intensity", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .filter_map(|s| s.parse().ok())
        .collect();
    assert_eq!(values.len(), 32 * 32);
    assert!(values.iter().all(|v| *v == 0.0 || *v == 2.0));
}
