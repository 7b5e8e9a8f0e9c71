//! End-to-end runs of the `tiltbell` binary.

use std::process::{Command, Output};

use serde_json::Value;

fn tiltbell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiltbell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = tiltbell(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn close(v: &Value, expected: f64, tol: f64) {
    let x = v.as_f64().unwrap_or_else(|| panic!("{v} is not a number"));
    assert!((x - expected).abs() <= tol, "{x} vs {expected}");
}

#[test]
fn help_lists_all_subcommands() {
    let text = stdout(&tiltbell(&["--help"]));
    for cmd in ["report", "qvalue", "strategy", "tilt", "assignments", "npa", "npa-map", "scan", "verify"] {
        assert!(text.contains(cmd), "missing {cmd}");
    }
}

#[test]
fn report_worked_example() {
    let r = json(&["report", "--etaA", "0.85", "--etaB", "0.85"]);
    assert_eq!(r["schemaVersion"], 1);
    close(&r["cQ"], 2.98098, 5e-6);
    close(&r["loopholeFreeCHSH"], 2.19876, 5e-6);
    close(&r["isoEffectiveCHSH"], 2.08854, 5e-6);
    assert_eq!(r["inViolationRegion"], true);
    for key in ["alpha", "beta", "localBound", "cA", "cB", "schmidt", "criticalEtaB"] {
        assert!(r[key].is_number(), "{key}");
    }
}

#[test]
fn report_perfect_detectors() {
    let r = json(&["report", "--etaA", "1", "--etaB", "1"]);
    close(&r["cQ"], 2.0 * std::f64::consts::SQRT_2, 1e-12);
    close(&r["loopholeFreeCHSH"], 2.0 * std::f64::consts::SQRT_2, 1e-12);
}

#[test]
fn report_outside_violation_region() {
    let r = json(&["report", "--etaA", "0.6", "--etaB", "0.6"]);
    assert_eq!(r["inViolationRegion"], false);
    close(&r["loopholeFreeCHSH"], 2.0, 1e-12);
    assert!(r["cA"].is_null());
}

#[test]
fn qvalue_and_strategy() {
    let q = json(&["qvalue", "--alpha", "0.999", "--beta", "0.999", "--json"]);
    close(&q["cQ"], 3.998000001333, 1e-12);
    let s = json(&["strategy", "--alpha", "0", "--beta", "0"]);
    close(&s["schmidt"], std::f64::consts::FRAC_1_SQRT_2, 1e-12);
    assert_eq!(s["state"].as_array().unwrap().len(), 4);
    close(&s["lambda"], 2.0 * std::f64::consts::SQRT_2, 1e-12);
}

#[test]
fn tilt_and_assignments() {
    let t = json(&["tilt", "--etaA", "0.85", "--etaB", "0.85"]);
    close(&t["tiltedLocalBound"], 2.0 + 2.0 * 2.0 * 0.15 / 0.85, 1e-12);
    assert_eq!(t["coefficients"].as_array().unwrap().len(), 2);
    let a = json(&["assignments", "--etaA", "0.9", "--etaB", "0.8", "--json"]);
    assert_eq!(a["assignments"].as_array().unwrap().len(), 16);
    assert!(a["delta"].as_f64().unwrap() >= 0.0);
}

#[test]
fn npa_bound_is_tight_at_one_plus_ab_on_axis() {
    let r = json(&["npa", "--alpha", "1", "--beta", "0", "--level", "1+AB"]);
    close(&r["upperBound"], 10f64.sqrt(), 1e-6);
    assert_eq!(r["level"], "1+AB");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(tiltbell(&["report", "--etaA", "1.5"]).status.code(), Some(2));
    assert_eq!(tiltbell(&["report", "--etaA", "0.9", "--alpha", "0.1"]).status.code(), Some(2));
    assert_eq!(tiltbell(&["npa", "--level", "zero"]).status.code(), Some(2));
    assert_eq!(tiltbell(&["scan", "--grid", "1"]).status.code(), Some(2));
}

#[test]
fn numeric_errors_exit_3() {
    assert_eq!(tiltbell(&["strategy", "--alpha", "1", "--beta", "1"]).status.code(), Some(3));
}

#[test]
fn scan_is_deterministic_and_marks_bad_rows() {
    let args = ["scan", "--grid", "5", "--x-min", "0", "--outputs", "cQ,loopholeFreeCHSH,cosines,delta"];
    let a = stdout(&tiltbell(&args));
    let b = stdout(&tiltbell(&args));
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "etaA,etaB,alpha,beta,cQ,loopholeFreeCHSH,cA,cB,delta,status");
    assert_eq!(lines.len(), 26);
    assert!(lines[1].ends_with("must be strictly positive"));
    assert!(lines.last().unwrap().ends_with(",ok"));
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert!(last[4].contains('e'));
    assert!((last[4].parse::<f64>().unwrap() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-13);
}

#[test]
fn scan_alpha_plane_beta_family() {
    let out = stdout(&tiltbell(&[
        "scan", "--plane", "alpha-plane", "--grid", "4", "--x-max", "1.5", "--beta-values", "0", "--outputs", "cosines",
    ]));
    for line in out.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[4].parse::<f64>().unwrap(), 0.0, "{line}");
    }
}

#[test]
fn npa_map_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.csv");
    let out = tiltbell(&["npa-map", "--grid", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,beta,minTightLevel,status");
    assert_eq!(lines[1], "0.0000000000000000e0,0.0000000000000000e0,1,ok");
    assert_eq!(lines.len(), 4);
}

#[test]
fn verify_passes_and_mutations_fail() {
    let ok = tiltbell(&["verify"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert_eq!(stdout(&ok).lines().filter(|l| l.starts_with("[PASS]")).count(), 11);
    let tampered = tiltbell(&["verify", "--only", "5", "--tamper-tau4", "0.5"]);
    assert_eq!(tampered.status.code(), Some(4));
    let loose = tiltbell(&["verify", "--only", "9", "--npa-tol", "1e-2", "--json"]);
    assert_eq!(loose.status.code(), Some(4));
    let doc: Value = serde_json::from_slice(&loose.stdout).unwrap();
    assert_eq!(doc["criteria"][0]["passed"], false);
}
