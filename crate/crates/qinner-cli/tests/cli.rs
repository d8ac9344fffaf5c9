use std::process::Command;

use serde_json::Value;

fn qinner(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qinner")).args(args).output().expect("binary runs")
}

fn run_json(args: &[&str]) -> Value {
    let out = qinner(args);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = qinner(&["coeffs", "--spec", "p:2", "--kmax", "10", "--method", "residue", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let meta: Value = serde_json::from_slice(&std::fs::read(dir.path().join("a.json.meta.json")).unwrap()).unwrap();
    let doc: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(meta["config_hash"], doc["config_hash"]);
    assert_eq!(doc["schema_version"], 1);
}

#[test]
fn coeffs_methods_agree_for_inf() {
    let doc = run_json(&["coeffs", "--spec", "inf", "--kmax", "40", "--method", "both"]);
    let diff = doc["result"]["comparison"]["max_abs_diff"].as_f64().unwrap();
    assert!(diff < 1e-6, "{diff}");
    let entries = doc["result"]["streams"][0]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 40);
}

#[test]
fn single_prime_is_not_compact() {
    let doc = run_json(&["classify", "--spec", "p:2"]);
    assert_eq!(doc["result"]["compact"], false);
    assert_eq!(doc["result"]["decay_class"], "NonCompact");
}

#[test]
fn pole_part_curve_closes() {
    let out = qinner(&["figure", "--spec", "inf", "--pole-part", "--grid", "512", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# schema_version=1 config_hash="));
    assert_eq!(lines.next().unwrap(), "j,theta,re,im");
    let pts: Vec<(f64, f64)> = lines
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[2], f[3])
        })
        .collect();
    assert_eq!(pts.len(), 512);
    let step = pts.windows(2).map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt()).fold(0.0, f64::max);
    let (a, b) = (pts[0], pts[pts.len() - 1]);
    let gap = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    assert!(gap <= step, "gap {gap} step {step}");
}

#[test]
fn svg_carries_hash() {
    let out = qinner(&["figure", "--spec", "p:2", "--grid", "64", "--format", "svg"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("<!-- schema_version=1 config_hash="));
    assert!(text.contains("<polyline"));
}

#[test]
fn large_truncation_rejected() {
    let out = qinner(&["spectrum", "--spec", "inf", "--n", "513"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "resource_limit");
}

#[test]
fn bad_spec_is_a_parse_error() {
    let out = qinner(&["eval", "--spec", "p:4", "--z", "0.5,1"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "parse");
}

#[test]
fn eval_reports_poles_per_point() {
    let doc = run_json(&["eval", "--spec", "inf", "--z", "0.5,3", "--z", "-2"]);
    let vals = doc["result"]["values"].as_array().unwrap();
    assert!(vals[0]["value"].is_array());
    assert!(vals[1]["error"].as_str().unwrap().contains("pole"));
}

#[test]
fn sonin_places() {
    let doc = run_json(&["sonin", "--places", "inf", "--n", "64"]);
    assert!(doc["result"]["report"]["dimension_curve"].is_array());
}
