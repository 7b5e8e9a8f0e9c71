//! End-to-end acceptance checks. Each criterion returns a pass/fail outcome
//! with a one-line detail and its runtime; [`VerifyConfig`] exposes hooks to
//! perturb inputs so that the checks themselves can be shown to bite.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{effective_behavior, Behavior, BellFunctional, CorrelatorSet, Scenario};
use crate::closed_form::{self, real_roots, PolySpec};
use crate::error::Result;
use crate::npa::{self, NpaLevel, NpaOptions};
use crate::qubit::{oracle_max, optimal_state, stationarity_residuals};
use crate::tilting::{self, enumerate_assignments, tilt_functional, DeterministicAssignment};

/// Knobs for [`run_all`]. The default configuration is the one the criteria
/// are stated for; the others exist to demonstrate that checks fail when
/// inputs are corrupted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    /// Added to the `λ⁴` coefficient of the general sextic wherever the
    /// checks evaluate it.
    pub tau4_perturbation: f64,
    /// Tolerance handed to the SDP solver.
    pub npa_tol: f64,
    /// Grid size of the brute-force oracle.
    pub oracle_grid: usize,
    /// Enforce the per-criterion runtime limits.
    pub enforce_time_limits: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            tau4_perturbation: 0.0,
            npa_tol: npa::DEFAULT_TOLERANCE,
            oracle_grid: 32,
            enforce_time_limits: true,
        }
    }
}

impl VerifyConfig {
    fn gen_poly(&self, alpha: f64, beta: f64) -> Result<PolySpec> {
        let mut p = closed_form::gen_poly(alpha, beta)?;
        if self.tau4_perturbation != 0.0 {
            p.coeffs[4] += self.tau4_perturbation;
            let monic: Vec<f64> = p.coeffs.iter().map(|c| c / p.coeffs[6]).collect();
            p.real_roots = real_roots(&monic)?;
            p.largest_real_root = p.real_roots.last().copied().unwrap_or(f64::NAN);
        }
        Ok(p)
    }

    /// Largest root of the (possibly perturbed) general sextic.
    fn c_q(&self, alpha: f64, beta: f64) -> Result<f64> {
        Ok(self.gen_poly(alpha, beta)?.largest_real_root)
    }

    fn npa_options(&self) -> NpaOptions {
        NpaOptions {
            tol: self.npa_tol,
            allow_high_level: false,
        }
    }
}

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(serialize_with = "secs")]
    pub elapsed: Duration,
    #[serde(serialize_with = "opt_secs")]
    pub limit: Option<Duration>,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

fn opt_secs<S: serde::Serializer>(d: &Option<Duration>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match d {
        Some(d) => s.serialize_some(&d.as_secs_f64()),
        None => s.serialize_none(),
    }
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2}. {:<34} {:>8.3}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// A criterion's check: `Ok((passed, detail))`, or an error counted as failure.
type Check = fn(&VerifyConfig) -> Result<(bool, String)>;

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Option<Duration>,
    check: Check,
}

const fn secs_limit(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

const CRITERIA: [Criterion; 11] = [
    Criterion { id: 1, name: "Tsirelson recovery", limit: secs_limit(1), check: tsirelson },
    Criterion { id: 2, name: "Single-tilt family", limit: secs_limit(1), check: single_tilt },
    Criterion { id: 3, name: "Worked example at eta = 0.85", limit: secs_limit(1), check: worked_example },
    Criterion { id: 4, name: "12-digit benchmark", limit: secs_limit(1), check: benchmark },
    Criterion { id: 5, name: "Quartic/sextic consistency", limit: None, check: polynomial_consistency },
    Criterion { id: 6, name: "Oracle closure", limit: secs_limit(120), check: oracle_closure },
    Criterion { id: 7, name: "Self-testing endpoints", limit: None, check: self_testing_endpoints },
    Criterion { id: 8, name: "Assignment optimality", limit: secs_limit(60), check: assignment_optimality },
    Criterion { id: 9, name: "NPA soundness and monotonicity", limit: secs_limit(300), check: npa_soundness },
    Criterion { id: 10, name: "Minimum tight NPA level pattern", limit: None, check: tight_level_pattern },
    Criterion { id: 11, name: "Property suite", limit: secs_limit(30), check: property_suite },
];

/// Number of criteria.
pub const CRITERION_COUNT: usize = CRITERIA.len();

/// Runs one criterion by id (1-based).
pub fn run(id: u8, config: &VerifyConfig) -> Option<CriterionOutcome> {
    let c = CRITERIA.iter().find(|c| c.id == id)?;
    let start = Instant::now();
    let result = (c.check)(config);
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = c.limit {
        if config.enforce_time_limits && elapsed > limit {
            passed = false;
            detail = format!("{detail}; exceeded runtime limit of {}s", limit.as_secs());
        }
    }
    Some(CriterionOutcome {
        id: c.id,
        name: c.name,
        passed,
        detail,
        elapsed,
        limit: c.limit,
    })
}

/// Runs every criterion in order.
pub fn run_all(config: &VerifyConfig) -> Vec<CriterionOutcome> {
    CRITERIA.iter().filter_map(|c| run(c.id, config)).collect()
}

fn tsirelson(cfg: &VerifyConfig) -> Result<(bool, String)> {
    let c_q = cfg.c_q(0.0, 0.0)?;
    let bound = npa::npa_bound_with(0.0, 0.0, NpaLevel::Full(1), cfg.npa_options())?;
    let target = 2.0 * SQRT_2;
    let ok = (c_q - target).abs() <= 1e-9 && (bound - target).abs() <= 1e-6;
    Ok((
        ok,
        format!(
            "c_Q(0,0) - 2sqrt2 = {:.2e}, NPA level 1 - 2sqrt2 = {:.2e}",
            c_q - target,
            bound - target
        ),
    ))
}

fn single_tilt(cfg: &VerifyConfig) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for a in [0.0, 0.25, 0.5, 1.0, 1.5] {
        let r = cfg.c_q(a, 0.0)?;
        worst = worst.max((r - (8.0 + 2.0 * a * a).sqrt()).abs());
    }
    Ok((worst <= 1e-8, format!("max |root - sqrt(8+2a^2)| = {worst:.2e}")))
}

fn worked_example(cfg: &VerifyConfig) -> Result<(bool, String)> {
    let eta = 0.85;
    let (a, b) = tilting::tilts_from_efficiencies(eta, eta)?;
    let c_q = cfg.c_q(a, b)?;
    let plus = DeterministicAssignment::from_bits(0, 0, 0, 0)?;
    let loophole_free = tilting::effective_chsh_value(c_q, &plus, eta, eta)?;

    let iso = crate::bell::behavior_from_correlators(&CorrelatorSet {
        exy: [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]],
        ax: [0.0; 2],
        by: [0.0; 2],
    })?;
    let q = plus.behavior(Scenario::CHSH)?;
    let iso_eff = BellFunctional::chsh().evaluate(&effective_behavior(&iso, &q, eta, eta)?)?;

    let ok = (c_q - 2.98098).abs() <= 5e-6
        && (loophole_free - 2.19876).abs() <= 5e-6
        && (iso_eff - 2.08854).abs() <= 5e-6;
    Ok((
        ok,
        format!("tilted {c_q:.6}, loophole-free {loophole_free:.6}, isotropic {iso_eff:.6}"),
    ))
}

fn benchmark(cfg: &VerifyConfig) -> Result<(bool, String)> {
    let r = cfg.c_q(0.999, 0.999)?;
    let d = r - 3.998000001333;
    Ok((d.abs() <= 1e-9, format!("c_Q(0.999,0.999) = {r:.13} (diff {d:.2e})")))
}

fn polynomial_consistency(cfg: &VerifyConfig) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for i in 0..100 {
        let a = 0.99 * i as f64 / 99.0;
        let s = closed_form::sym_poly(a)?.largest_real_root;
        let g = cfg.c_q(a, a)?;
        worst = worst.max((s - g).abs());
    }
    Ok((
        worst <= 1e-10,
        format!("max |sym - gen| over 100 diagonal points = {worst:.2e}"),
    ))
}

fn oracle_closure(cfg: &VerifyConfig) -> Result<(bool, String)> {
    let mut points = Vec::new();
    for i in 0..20 {
        for j in 0..20 {
            let (a, b) = (1.9 * i as f64 / 19.0, 1.9 * j as f64 / 19.0);
            if a + b <= 1.9 + 1e-12 {
                points.push((a, b));
            }
        }
    }
    let rows: Vec<Result<(f64, f64)>> = points
        .par_iter()
        .map(|&(a, b)| {
            let c_q = cfg.c_q(a, b)?;
            let oracle = oracle_max(a, b, cfg.oracle_grid, 1e-10)?;
            let (ca, cb) = closed_form::optimal_cosines(a, b, c_q)?;
            let res = stationarity_residuals(ca, cb, c_q, a, b).max_abs();
            Ok(((oracle.lambda - c_q).abs(), res))
        })
        .collect();
    let (mut worst_oracle, mut worst_res) = (0.0f64, 0.0f64);
    for r in rows {
        let (d, s) = r?;
        worst_oracle = worst_oracle.max(d);
        worst_res = worst_res.max(s);
    }
    Ok((
        worst_oracle <= 1e-6 && worst_res <= 1e-8,
        format!(
            "{} points: max |oracle - c_Q| = {worst_oracle:.2e}, max stationarity residual = {worst_res:.2e}",
            points.len()
        ),
    ))
}

fn self_testing_endpoints(cfg: &VerifyConfig) -> Result<(bool, String)> {
    let c0 = cfg.c_q(0.0, 0.0)?;
    let (ca0, _) = closed_form::optimal_cosines(0.0, 0.0, c0)?;
    let s0 = optimal_state(0.0, 0.0)?;
    let c1 = cfg.c_q(0.999, 0.999)?;
    let (ca1, _) = closed_form::optimal_cosines(0.999, 0.999, c1)?;
    let s1 = optimal_state(0.999, 0.999)?;
    let ok = ca0.abs() <= 1e-9
        && (s0.schmidt - FRAC_1_SQRT_2).abs() <= 1e-9
        && (1.0 - ca1).abs() <= 0.02
        && (1.0 - s1.schmidt).abs() <= 0.02;
    Ok((
        ok,
        format!(
            "c*(0) = {ca0:.1e}, xi*(0) - 1/sqrt2 = {:.1e}; c*(0.999) = {ca1:.5}, xi*(0.999) = {:.5}",
            s0.schmidt - FRAC_1_SQRT_2,
            s1.schmidt
        ),
    ))
}

fn assignment_optimality(cfg: &VerifyConfig) -> Result<(bool, String)> {
    let mut points = Vec::new();
    for i in 0..50 {
        for j in 0..50 {
            let eta_a = 0.5 + 0.5 * (i + 1) as f64 / 50.0;
            let eta_b = 0.5 + 0.5 * (j + 1) as f64 / 50.0;
            if tilting::in_violation_region(eta_a, eta_b) {
                points.push((eta_a, eta_b));
            }
        }
    }
    let deltas: Vec<Result<f64>> = points
        .par_iter()
        .map(|&(ea, eb)| {
            let (a, b) = tilting::tilts_from_efficiencies(ea, eb)?;
            let c_q = cfg.c_q(a, b)?.max(2.0 + a + b);
            let c_alt = closed_form::alt_quantum_value(a, b)?;
            Ok(ea * eb * (c_q - c_alt) + 4.0 * (1.0 - ea) * (1.0 - eb))
        })
        .collect();
    let mut min = f64::INFINITY;
    for d in deltas {
        min = min.min(d?);
    }
    Ok((
        min >= -1e-9,
        format!("{} points in the violation region, min Delta = {min:.3e}", points.len()),
    ))
}

/// 25 deterministic low-discrepancy points in `α + β ≤ 1.9`.
fn npa_sample_points() -> Vec<(f64, f64)> {
    let g = 1.324_717_957_244_746; // plastic number
    let (u0, v0) = (1.0 / g, 1.0 / (g * g));
    (0..25)
        .map(|k| {
            let u = (0.5 + u0 * k as f64).fract();
            let v = (0.5 + v0 * k as f64).fract();
            let a = 1.9 * u;
            (a, (1.9 - a) * v)
        })
        .collect()
}

fn npa_soundness(cfg: &VerifyConfig) -> Result<(bool, String)> {
    let levels = NpaLevel::up_to(NpaLevel::Full(3));
    let rows: Vec<Result<(f64, f64, f64)>> = npa_sample_points()
        .par_iter()
        .map(|&(a, b)| {
            let c_q = cfg.c_q(a, b)?;
            let mut worst_sound = f64::INFINITY;
            let mut worst_mono = f64::NEG_INFINITY;
            let mut worst_gap = 0.0f64;
            let mut prev = f64::INFINITY;
            for &level in &levels {
                let r = npa::npa_solve(a, b, level, cfg.npa_options())?;
                worst_sound = worst_sound.min(r.upper_bound - c_q);
                worst_mono = worst_mono.max(r.upper_bound - prev);
                worst_gap = worst_gap.max(r.duality_gap);
                prev = r.upper_bound;
            }
            Ok((worst_sound, worst_mono, worst_gap))
        })
        .collect();
    let (mut sound, mut mono, mut gap) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for r in rows {
        let (s, m, g) = r?;
        sound = sound.min(s);
        mono = mono.max(m);
        gap = gap.max(g);
    }
    let ok = sound >= -1e-7 && mono <= 1e-7 && gap <= 1e-6;
    Ok((
        ok,
        format!(
            "min(bound - c_Q) = {sound:.2e}, max level increase = {mono:.2e}, max solver gap = {gap:.2e}"
        ),
    ))
}

fn tight_level_pattern(cfg: &VerifyConfig) -> Result<(bool, String)> {
    let max = NpaLevel::Full(3);
    let opts = cfg.npa_options();
    let tight = |a: f64, b: f64| -> Result<Option<NpaLevel>> {
        let c_q = cfg.c_q(a, b)?;
        for level in NpaLevel::up_to(max) {
            if npa::npa_bound_with(a, b, level, opts)? - c_q <= 1e-6 {
                return Ok(Some(level));
            }
        }
        Ok(None)
    };
    let fmt = |l: Option<NpaLevel>| l.map_or_else(|| "not-found".to_string(), |l| l.to_string());

    let axis = [(0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (1.5, 0.0), (0.0, 0.7), (0.0, 1.4)];
    let mut axis_ok = true;
    let mut parts = Vec::new();
    for &(a, b) in &axis {
        let l = tight(a, b)?;
        axis_ok &= matches!(l, Some(l) if l <= NpaLevel::OnePlusAb);
        parts.push(format!("({a},{b})->{}", fmt(l)));
    }
    let mut diag_ok = false;
    for a in [0.9, 0.95, 0.99] {
        let l = tight(a, a)?;
        diag_ok |= l.is_none_or(|l| l > NpaLevel::OnePlusAb);
        parts.push(format!("({a},{a})->{}", fmt(l)));
    }
    Ok((axis_ok && diag_ok, parts.join(" ")))
}

/// A random no-signaling behavior: a mixture of the 16 local deterministic
/// points and the 8 extremal nonlocal boxes.
fn random_no_signaling(rng: &mut ChaCha8Rng) -> Result<Behavior> {
    let s = Scenario::CHSH;
    let mut weights: Vec<f64> = (0..24).map(|_| rng.random::<f64>().powi(3)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut table = vec![0.0; 16];
    for (k, w) in weights.iter().enumerate() {
        if k < 16 {
            let q = &enumerate_assignments()[k];
            for x in 0..2 {
                for y in 0..2 {
                    table[s.index(x, y, q.ax[x], q.by[y])] += w;
                }
            }
        } else {
            // p(ab|xy) = 1/2 when a ⊕ b = xy ⊕ r_x x ⊕ r_y y ⊕ r.
            let bits = k - 16;
            for x in 0..2 {
                for y in 0..2 {
                    let target = (x * y) ^ ((bits & 1) * x) ^ (((bits >> 1) & 1) * y) ^ ((bits >> 2) & 1);
                    for a in 0..2 {
                        table[s.index(x, y, a, a ^ target)] += 0.5 * w;
                    }
                }
            }
        }
    }
    Behavior::new(s, table)
}

/// A random (possibly signaling) behavior with independent random slices.
fn random_behavior(rng: &mut ChaCha8Rng) -> Result<Behavior> {
    let s = Scenario::CHSH;
    let mut table = vec![0.0; 16];
    for x in 0..2 {
        for y in 0..2 {
            let w: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let t: f64 = w.iter().sum();
            for a in 0..2 {
                for b in 0..2 {
                    table[s.index(x, y, a, b)] = w[2 * a + b] / t;
                }
            }
        }
    }
    Behavior::new(s, table)
}

fn property_suite(_cfg: &VerifyConfig) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let chsh = BellFunctional::chsh();
    let assignments = enumerate_assignments();
    let (mut norm, mut signal, mut ceiling, mut identity) = (0.0f64, 0.0f64, f64::NEG_INFINITY, 0.0f64);

    for _ in 0..1000 {
        let p = random_no_signaling(&mut rng)?;
        let q = random_no_signaling(&mut rng)?;
        let (ea, eb) = (rng.random::<f64>(), rng.random::<f64>());
        let out = effective_behavior(&p, &q, ea, eb)?;
        for x in 0..2 {
            for y in 0..2 {
                let sum: f64 = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| out.get(a, b, x, y)).sum();
                norm = norm.max((sum - 1.0).abs());
            }
        }
        signal = signal.max(out.signaling_discrepancy());

        let local_p = assignments[rng.random_range(0..16)].behavior(Scenario::CHSH)?;
        let local_q = {
            let a = assignments[rng.random_range(0..16)].behavior(Scenario::CHSH)?;
            let b = assignments[rng.random_range(0..16)].behavior(Scenario::CHSH)?;
            a.mix(&b, rng.random::<f64>())?
        };
        let v = chsh.evaluate(&effective_behavior(&local_p, &local_q, ea, eb)?)?;
        ceiling = ceiling.max(v - 2.0);

        let p = random_behavior(&mut rng)?;
        let qbar = &assignments[rng.random_range(0..16)];
        let (ea, eb) = (1.0 - rng.random::<f64>(), 1.0 - rng.random::<f64>());
        let t = tilt_functional(&chsh, qbar, ea, eb)?;
        let qb = qbar.behavior(Scenario::CHSH)?;
        let lhs = chsh.evaluate(&effective_behavior(&p, &qb, ea, eb)?)?;
        let rhs = ea * eb * t.functional().evaluate(&p)? + (1.0 - ea) * (1.0 - eb) * chsh.evaluate(&qb)?;
        identity = identity.max((lhs - rhs).abs());
    }
    let ok = norm <= 1e-12 && signal <= crate::NO_SIGNALING_TOLERANCE && ceiling <= 1e-12 && identity <= 1e-12;
    Ok((
        ok,
        format!(
            "1000 instances: normalization {norm:.1e}, signaling {signal:.1e}, local max - 2 = {ceiling:.1e}, identity {identity:.1e}"
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_points_in_region() {
        let p = npa_sample_points();
        assert_eq!(p.len(), 25);
        assert!(p.iter().all(|&(a, b)| a >= 0.0 && b >= 0.0 && a + b <= 1.9));
    }

    #[test]
    fn random_boxes_are_no_signaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert!(random_no_signaling(&mut rng).unwrap().is_no_signaling());
        }
    }

    #[test]
    fn tampered_sextic_is_caught() {
        let cfg = VerifyConfig {
            tau4_perturbation: 1e-3,
            ..Default::default()
        };
        assert!(!run(5, &cfg).unwrap().passed);
        assert!(!run(4, &cfg).unwrap().passed);
    }

    #[test]
    fn unknown_criterion() {
        assert!(run(12, &VerifyConfig::default()).is_none());
    }
}
