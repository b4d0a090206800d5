use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphere-rigidity"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).env("SPHERE_RIGIDITY_THREADS", "1").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_ball_ellipsoid_and_perturbed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(run(&["make-body", "--out", "ball.json"], d).status.success());
    let out = run(&["verify", "--problem", "bp5", "ball.json"], d);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(report["result"]["l2_residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(report["config"]["command"], "verify");
    assert!(report["version"].as_str().unwrap().starts_with("sphere-rigidity"));

    assert!(run(&["make-body", "--axes", "1.05,1,0.95", "--out", "ell.json"], d).status.success());
    let out = run(&["verify", "--problem", "bp8", "ell.json"], d);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["result"]["l2_residual"].as_f64().unwrap() <= 1e-5);

    assert!(run(&["make-body", "--perturb", "4:1:0.01", "--out", "p4.json"], d).status.success());
    assert_eq!(run(&["verify", "--problem", "bp5", "p4.json"], d).status.code(), Some(2));
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.json"), "not json").unwrap();
    assert_eq!(run(&["solve-ma", "bad.json"], d).status.code(), Some(1));
    assert_eq!(run(&["verify", "--problem", "bp5", "missing.json"], d).status.code(), Some(1));
    assert_eq!(run(&["rigidity"], d).status.code(), Some(1));
    assert_eq!(run(&["rigidity", "--degrees", "3"], d).status.code(), Some(1));
    assert_eq!(run(&["multipliers", "--problem", "bp7"], d).status.code(), Some(1));
    assert_eq!(run(&["multipliers", "--problem", "bp5", "--n", "2"], d).status.code(), Some(1));
    // Far outside the convexity window.
    assert_eq!(run(&["make-body", "--perturb", "8:3:0.5"], d).status.code(), Some(1));
}

#[test]
fn multiplier_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["multipliers", "--problem", "bp8", "--band-limit", "8"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,funk,laplace,mu,contraction_mu"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows[2][3], 1.0);
    assert!((rows[4][3] + 1.0 / 6.0).abs() < 1e-15);
    assert_eq!(rows[2][4], 0.0);
    let out = run(&["multipliers", "--problem", "bp5", "--band-limit", "8"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    let m4: Vec<f64> = text.lines().nth(5).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((m4[3] + 0.75).abs() < 1e-15);
    assert!(!text.contains('\r'));
}

#[test]
fn rigidity_scan_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["rigidity", "--degrees", "2,4", "--t-values", "0.002,0.004,0.006", "--resolution", "20", "--band-limit", "12", "--problem", "bp5"];
    let a = run(&[&args[..], &["--out", "a"]].concat(), d);
    run(&[&args[..], &["--out", "b"]].concat(), d);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    for f in ["rigidity.csv", "rigidity.json"] {
        let x = fs::read(d.join("a").join(f)).unwrap();
        let y = fs::read(d.join("b").join(f)).unwrap();
        if f.ends_with(".json") {
            // Only the output path differs.
            let strip = |v: Vec<u8>| {
                let mut j: Value = serde_json::from_slice(&v).unwrap();
                j["config"]["out"] = Value::Null;
                j
            };
            assert_eq!(strip(x), strip(y));
        } else {
            assert_eq!(x, y);
        }
    }
    let csv = fs::read_to_string(d.join("a/rigidity.csv")).unwrap();
    assert!(csv.starts_with("problem,n,L,m,k,t,residual_l2,residual_sup,status\n"));
    assert_eq!(csv.lines().count(), 7);
    let report = json(&a);
    let scans = report["result"].as_array().unwrap();
    assert!(scans[0]["slope"].as_f64().unwrap() < 0.05 * 1.75);
    let ratio = scans[1]["slope"].as_f64().unwrap() / scans[1]["predicted"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 0.1);
}

#[test]
fn rigidity_prunes_nonconvex_t() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["rigidity", "--degrees", "8", "--t-values", "0.002,0.004,0.05", "--resolution", "20", "--band-limit", "12", "--problem", "bp5", "--out", "o"],
        dir.path(),
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("pruned"));
    let csv = fs::read_to_string(dir.path().join("o/rigidity.csv")).unwrap();
    assert!(csv.lines().any(|l| l.ends_with("nonconvex") && l.contains(",0.05,")));
    assert_eq!(json(&out)["result"][0]["pruned_t"][0].as_f64(), Some(0.05));
}

#[test]
fn solve_ma_traces() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("zero.json"), r#"{"dim_n":3,"band_limit":8,"coeffs":[]}"#).unwrap();
    let out = run(&["solve-ma", "zero.json", "--resolution", "12"], d);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["trace"]["iterates"].as_array().unwrap().len(), 0);

    fs::write(d.join("y4.json"), r#"{"dim_n":3,"band_limit":16,"coeffs":[[4,1,0.01]]}"#).unwrap();
    let out = run(&["solve-ma", "y4.json", "--resolution", "28", "--out", "trace.json"], d);
    assert_eq!(out.status.code(), Some(0));
    let trace: Value = serde_json::from_slice(&fs::read(d.join("trace.json")).unwrap()).unwrap();
    assert_eq!(trace["result"]["trace"]["converged"], true);
    assert!(trace["result"]["trace"]["final_residual"].as_f64().unwrap() <= 1e-8);

    fs::write(d.join("big.json"), r#"{"dim_n":3,"band_limit":12,"coeffs":[[8,3,2.0]]}"#).unwrap();
    assert_eq!(run(&["solve-ma", "big.json", "--resolution", "20"], d).status.code(), Some(2));
}

#[test]
fn radon_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("arc.json"), r#"{"coeffs":[0.0,0.02,0.01,-0.005]}"#).unwrap();
    let out = run(&["radon", "arc.json", "--resolution", "256", "--out", "curve.json"], d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert!(report["result"]["residual"]["l2_residual"].as_f64().unwrap() <= 1e-8);
    assert!(report["result"]["ellipse"]["distance"].as_f64().unwrap() >= 1e-3);
    let body: Value = serde_json::from_slice(&fs::read(d.join("curve.json")).unwrap()).unwrap();
    assert_eq!(body["dim_n"], 2);

    fs::write(d.join("steep.json"), r#"{"coeffs":[0.0,0.2]}"#).unwrap();
    assert_eq!(run(&["radon", "steep.json", "--resolution", "256"], d).status.code(), Some(1));
}
