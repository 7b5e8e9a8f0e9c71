//! Known values checked through the public API.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use tiltbell::closed_form::{gen_poly, max_quantum_value, optimal_cosines, self_test_strategy, sym_poly};
use tiltbell::npa::{npa_bound, NpaLevel};
use tiltbell::qubit::{optimal_state, oracle_max};
use tiltbell::tilting::{
    assignment_gap, critical_efficiency_bob, doubly_tilted_chsh, effective_chsh_value, enumerate_assignments,
    in_violation_region, tilts_from_efficiencies,
};
use tiltbell::{Behavior, BellFunctional, Scenario};

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol:e})");
}

#[test]
fn chsh_local_and_quantum_bounds() {
    let chsh = BellFunctional::chsh();
    close(chsh.local_bound(), 2.0, 0.0);
    close(max_quantum_value(0.0, 0.0).unwrap(), 2.0 * SQRT_2, 1e-12);
    close(npa_bound(0.0, 0.0, NpaLevel::Full(1)).unwrap(), 2.0 * SQRT_2, 1e-7);
    let u = Behavior::uniform(Scenario::CHSH);
    close(chsh.evaluate(&u).unwrap(), 0.0, 1e-15);
}

#[test]
fn single_tilt_family() {
    for &a in &[0.0, 0.25, 0.5, 1.0, 1.5, 1.9] {
        close(max_quantum_value(a, 0.0).unwrap(), (8.0 + 2.0 * a * a).sqrt(), 1e-10);
        close(max_quantum_value(0.0, a).unwrap(), (8.0 + 2.0 * a * a).sqrt(), 1e-10);
    }
}

#[test]
fn worked_example_at_085() {
    let t = doubly_tilted_chsh(0.85, 0.85).unwrap();
    let c_q = max_quantum_value(t.alpha(), t.beta()).unwrap();
    close(c_q, 2.98098, 5e-6);
    close(t.effective_value(c_q).unwrap(), 2.19876, 5e-6);
    let iso = effective_chsh_value(2.0 * SQRT_2, &enumerate_assignments()[0], 0.85, 0.85).unwrap();
    close(iso, 2.08854, 5e-6);
}

#[test]
fn twelve_digit_benchmark() {
    close(sym_poly(0.999).unwrap().largest_real_root, 3.998000001333, 1e-12);
    close(gen_poly(0.999, 0.999).unwrap().largest_real_root, 3.998000001333, 1e-12);
}

#[test]
fn self_testing_endpoints() {
    let s = optimal_state(0.0, 0.0).unwrap();
    close(s.c_a, 0.0, 1e-14);
    close(s.schmidt, FRAC_1_SQRT_2, 1e-12);
    let (c_a, c_b) = optimal_cosines(0.999, 0.999, max_quantum_value(0.999, 0.999).unwrap()).unwrap();
    assert!(c_a > 0.99 && c_b > 0.99);
    assert!(optimal_state(0.999, 0.999).unwrap().schmidt > 0.999);
}

#[test]
fn self_test_report_agrees_with_oracle() {
    for &(a, b) in &[(0.3, 0.3), (0.8, 0.2), (0.1, 1.4)] {
        let r = self_test_strategy(a, b).unwrap();
        assert!(r.oracle_delta < 1e-8, "{a},{b}: {}", r.oracle_delta);
        close(r.strategy.lambda, r.c_q, 1e-9);
        let o = oracle_max(a, b, 32, 1e-10).unwrap();
        close(o.lambda, r.c_q, 1e-8);
    }
}

#[test]
fn violation_region_and_critical_efficiency() {
    assert!(!in_violation_region(0.6, 0.6));
    assert!(in_violation_region(0.85, 0.85));
    close(critical_efficiency_bob(1.0).unwrap(), 0.5, 1e-15);
    close(critical_efficiency_bob(2.0 / 3.0).unwrap(), 2.0 / 3.0, 1e-15);
    assert!(critical_efficiency_bob(0.5).is_err());
    let (a, b) = tilts_from_efficiencies(1.0, 0.75).unwrap();
    close(a, 2.0 / 3.0, 1e-15);
    close(b, 0.0, 0.0);
}

#[test]
fn assignment_gap_is_nonnegative() {
    for &(ea, eb) in &[(1.0, 0.75), (0.9, 0.9), (0.8, 0.95), (0.7, 1.0)] {
        let g = assignment_gap(ea, eb).unwrap();
        assert!(g.delta >= -1e-9, "{ea},{eb}: {g:?}");
    }
}

#[test]
fn npa_levels_bound_the_closed_form() {
    let c_q = max_quantum_value(0.5, 0.5).unwrap();
    let mut prev = f64::INFINITY;
    for level in NpaLevel::up_to(NpaLevel::Full(2)) {
        let b = npa_bound(0.5, 0.5, level).unwrap();
        assert!(b >= c_q - 1e-8, "{level}: {b} < {c_q}");
        assert!(b <= prev + 1e-7, "{level}: {b} > {prev}");
        prev = b;
    }
    close(prev, c_q, 1e-6);
}
