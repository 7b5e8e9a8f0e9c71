//! Runs every acceptance criterion and prints one line per criterion.
//!
//! The lines are written straight to the process's stdout so they are shown
//! even when the test harness captures output.

use std::io::Write;

use tiltbell::acceptance::{run, run_all, VerifyConfig, CRITERION_COUNT};

fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn all_criteria_pass() {
    let outcomes = run_all(&VerifyConfig::default());
    assert_eq!(outcomes.len(), CRITERION_COUNT);
    emit("");
    for o in &outcomes {
        emit(&o.to_string());
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    emit(&format!(
        "acceptance: {}/{} criteria passed",
        CRITERION_COUNT - failed.len(),
        CRITERION_COUNT
    ));
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn tampered_tau4_fails_consistency() {
    let cfg = VerifyConfig {
        tau4_perturbation: 0.5,
        ..Default::default()
    };
    let o = run(5, &cfg).unwrap();
    assert!(!o.passed, "{o}");
}

#[test]
fn loose_solver_tolerance_is_flagged() {
    let cfg = VerifyConfig {
        npa_tol: 1e-2,
        ..Default::default()
    };
    let o = run(9, &cfg).unwrap();
    assert!(!o.passed, "{o}");
}
