//! Exact maximal quantum values of doubly-tilted CHSH functionals and the
//! measurement cosines of the strategies achieving them.
//!
//! - `sym_poly(α)`: quartic whose largest real root is `c_Q(α, α)`, `α ∈ [0,1]`.
//! - `gen_poly(α, β)`: sextic whose largest real root is `c_Q(α, β)`, `α + β < 2`.
//! - `alt_poly(α, β)`: the same sextic with odd coefficients negated,
//!   governing `C + α⟨A_0⟩ − β⟨B_0⟩`.

mod roots;

pub use roots::{eval_scale, real_roots, real_roots_report, RootReport, MAX_DEGREE};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qubit::{
    eval_poly, oracle_max, stationarity_residuals, QubitStrategy, StationarityResiduals,
};

/// `α + β` above which root separation collapses and results are flagged.
pub const LOW_CONFIDENCE_THRESHOLD: f64 = 1.99;

/// Grid size used by [`self_test_strategy`] for the oracle cross-check.
pub const SELF_TEST_ORACLE_GRID: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyKind {
    /// Quartic for the symmetric tilt `α = β`.
    Sym4,
    /// Sextic for general tilts.
    Gen6,
    /// Sextic for the oppositely-signed tilts.
    Alt6,
}

/// A value polynomial with its real roots.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PolySpec {
    /// Ascending degree.
    pub coeffs: Vec<f64>,
    /// Ascending.
    pub real_roots: Vec<f64>,
    pub largest_real_root: f64,
    pub provenance: PolyKind,
    /// Set when `α + β > 1.99`.
    pub low_confidence: bool,
    /// Set when `α + β ≥ 2`, outside the region with a quantum violation.
    pub beyond_boundary: bool,
    pub multiplicity_collapsed: bool,
}

impl PolySpec {
    fn build(coeffs: Vec<f64>, provenance: PolyKind, tilt_sum: f64) -> Result<Self> {
        // Roots are found on the monic polynomial; coefficients are kept as given.
        let lead = *coeffs.last().ok_or(Error::DegenerateLeadingCoefficient)?;
        let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
        let report = real_roots_report(&monic)?;
        let largest = *report
            .roots
            .last()
            .ok_or_else(|| Error::Solver(format!("{provenance:?} polynomial has no real root")))?;
        Ok(PolySpec {
            coeffs,
            real_roots: report.roots,
            largest_real_root: largest,
            provenance,
            low_confidence: tilt_sum > LOW_CONFIDENCE_THRESHOLD,
            beyond_boundary: tilt_sum >= 2.0,
            multiplicity_collapsed: report.multiplicity_collapsed,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_poly(&self.coeffs, x)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

fn check_tilt(name: &'static str, value: f64, max: f64, range: &'static str) -> Result<()> {
    if !(0.0..=max).contains(&value) {
        return Err(Error::TiltOutOfRange { name, value, range });
    }
    Ok(())
}

/// Accepts `α, β ≥ 0` with `α + β < 2`.
pub fn check_tilts(alpha: f64, beta: f64) -> Result<()> {
    check_tilt("alpha", alpha, f64::MAX, "[0, 2)")?;
    check_tilt("beta", beta, f64::MAX, "[0, 2)")?;
    if alpha + beta >= 2.0 {
        return Err(Error::BoundaryDegenerate(alpha + beta));
    }
    Ok(())
}

/// Ascending coefficients of the symmetric quartic
/// `λ⁴ + (4−α²)λ³ + (11α⁴/4 − 12α² − 4)λ² + (2α⁶ − α⁴ − 20α² − 32)λ + 5α⁶ − 21α⁴ + 16α² − 32`.
pub fn sym_coefficients(alpha: f64) -> [f64; 5] {
    let a2 = alpha * alpha;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    [
        5.0 * a6 - 21.0 * a4 + 16.0 * a2 - 32.0,
        2.0 * a6 - a4 - 20.0 * a2 - 32.0,
        2.75 * a4 - 12.0 * a2 - 4.0,
        4.0 - a2,
        1.0,
    ]
}

/// Ascending coefficients `τ_0, …, τ_6` of the general sextic.
pub fn gen_coefficients(alpha: f64, beta: f64) -> [f64; 7] {
    let (a, b) = (alpha, beta);
    let (a2, b2) = (a * a, b * b);
    let (a3, b3) = (a2 * a, b2 * b);
    let (a4, b4) = (a2 * a2, b2 * b2);
    let (a5, b5) = (a4 * a, b4 * b);
    let (a6, b6) = (a4 * a2, b4 * b2);
    let t0 = a6 * (27.0 * b2 - 8.0)
        + a4 * (-54.0 * b4 + 48.0 * b2 + 32.0)
        + a2 * (27.0 * b6 + 48.0 * b4 - 400.0 * b2 + 128.0)
        - 8.0 * b6
        + 32.0 * b4
        + 128.0 * b2
        - 512.0;
    let t1 = -168.0 * a3 * b3 + 60.0 * a5 * b + 160.0 * a3 * b + 60.0 * a * b5 + 160.0 * a * b3
        - 576.0 * a * b;
    let t2 = -6.0 * a4 * b2 - 6.0 * a2 * b4 - 64.0 * a2 * b2
        + 20.0 * a4
        + 96.0 * a2
        + 20.0 * b4
        + 96.0 * b2
        + 320.0;
    let t3 = 8.0 * a3 * b3 - 24.0 * a3 * b - 24.0 * a * b3 + 96.0 * a * b;
    let t4 = 11.0 * a2 * b2 - 16.0 * a2 - 16.0 * b2 - 64.0;
    let t5 = -4.0 * a * b;
    [t0, t1, t2, t3, t4, t5, 4.0]
}

/// Quartic for `α = β`, valid on `[0, 1]` (`α = 1` is the compatible boundary).
pub fn sym_poly(alpha: f64) -> Result<PolySpec> {
    check_tilt("alpha", alpha, 1.0, "[0, 1]")?;
    PolySpec::build(sym_coefficients(alpha).to_vec(), PolyKind::Sym4, 2.0 * alpha)
}

fn check_general(alpha: f64, beta: f64) -> Result<()> {
    check_tilt("alpha", alpha, 2.0, "[0, 2]")?;
    check_tilt("beta", beta, 2.0, "[0, 2]")
}

/// General sextic. Points with `α + β ≥ 2` are computed and flagged.
pub fn gen_poly(alpha: f64, beta: f64) -> Result<PolySpec> {
    check_general(alpha, beta)?;
    PolySpec::build(gen_coefficients(alpha, beta).to_vec(), PolyKind::Gen6, alpha + beta)
}

/// `gen_poly` with odd-degree coefficients negated, i.e. `p(−λ)`.
pub fn alt_poly(alpha: f64, beta: f64) -> Result<PolySpec> {
    check_general(alpha, beta)?;
    let mut c = gen_coefficients(alpha, beta);
    for k in [1, 3, 5] {
        c[k] = -c[k];
    }
    PolySpec::build(c.to_vec(), PolyKind::Alt6, alpha + beta)
}

/// Maximal quantum value of `C + α⟨A_0⟩ + β⟨B_0⟩`: the largest root of
/// [`gen_poly`], never below the local bound `2 + α + β` (which it exceeds
/// throughout `α + β < 2`).
pub fn max_quantum_value(alpha: f64, beta: f64) -> Result<f64> {
    Ok(gen_poly(alpha, beta)?.largest_real_root.max(2.0 + alpha + beta))
}

/// Maximal quantum value of `C + α⟨A_0⟩ − β⟨B_0⟩`. Where the largest root of
/// [`alt_poly`] falls below the local bound, the maximum is the local bound.
pub fn alt_quantum_value(alpha: f64, beta: f64) -> Result<f64> {
    Ok(alt_poly(alpha, beta)?.largest_real_root.max(2.0 + alpha + beta))
}

/// `h(c) = 4c² + (4 − 3α²)c − α²(1 + λ)`, ascending; the common optimal
/// cosine for `α = β` is its largest root.
pub fn symmetric_cosine_polynomial(alpha: f64, lambda: f64) -> [f64; 3] {
    let a2 = alpha * alpha;
    [-a2 * (1.0 + lambda), 4.0 - 3.0 * a2, 4.0]
}

/// Quadratic in `c_A` obtained by eliminating `c_B` from the stationarity
/// conditions, ascending; Alice's optimal cosine is its largest root.
pub fn cosine_polynomial(alpha: f64, beta: f64, lambda: f64) -> [f64; 3] {
    let (a, b) = (alpha, beta);
    let (a2, b2) = (a * a, b * b);
    [
        2.0 * b2 * b2 - 4.0 * b2 - a2 * b2 + a * b2 * b * lambda - 4.0 * a * b * lambda,
        3.0 * a2 * b2 - 4.0 * a2 - 12.0 * b2 + 16.0,
        16.0 - 4.0 * a2,
    ]
}

/// Bob's optimal cosine in terms of Alice's.
pub fn bob_cosine(alpha: f64, beta: f64, c_a: f64) -> f64 {
    let (a2, b2) = (alpha * alpha, beta * beta);
    ((4.0 - a2) * c_a + a2 - b2) / (4.0 - b2)
}

/// Cancellation leaves cosines that vanish analytically (one tilt zero) at
/// `±1e-17`; snap those to zero so they stay in the `[0, 1)` domain.
fn snap_zero(c: f64) -> f64 {
    if c.abs() <= 1e-14 {
        0.0
    } else {
        c
    }
}

/// Optimal cosines `(c_A*, c_B*)` for the value `c_q`.
///
/// At `α = β` the symmetric form `c* = [3α² − 4 + √(16 + 9α⁴ + 8α²(2c_Q − 1))]/8`
/// is used; otherwise
/// `c_A* = [−16 − 3α²β² + 4α² + 12β² + √(4−α²)√(4−β²)√(16 − 4α² − 4β² + 9α²β² + 16αβc_Q)] / (32 − 8α²)`
/// and `c_B*` from [`bob_cosine`].
pub fn optimal_cosines(alpha: f64, beta: f64, c_q: f64) -> Result<(f64, f64)> {
    check_tilt("alpha", alpha, f64::MAX, "[0, 2)")?;
    check_tilt("beta", beta, f64::MAX, "[0, 2)")?;
    if alpha >= 2.0 || beta >= 2.0 || alpha + beta > 2.0 {
        return Err(Error::BoundaryDegenerate(alpha + beta));
    }
    let (a2, b2) = (alpha * alpha, beta * beta);
    if alpha == beta {
        let radicand = 16.0 + 9.0 * a2 * a2 + 8.0 * a2 * (2.0 * c_q - 1.0);
        if radicand < 0.0 {
            return Err(Error::NegativeRadicand(radicand));
        }
        let c = snap_zero((3.0 * a2 - 4.0 + radicand.sqrt()) / 8.0);
        return Ok((c, c));
    }
    let radicand = 16.0 - 4.0 * a2 - 4.0 * b2 + 9.0 * a2 * b2 + 16.0 * alpha * beta * c_q;
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand(radicand));
    }
    let root = (4.0 - a2).sqrt() * (4.0 - b2).sqrt() * radicand.sqrt();
    let c_a = (-16.0 - 3.0 * a2 * b2 + 4.0 * a2 + 12.0 * b2 + root) / (32.0 - 8.0 * a2);
    Ok((snap_zero(c_a), snap_zero(bob_cosine(alpha, beta, c_a))))
}

/// Closed-form optimum cross-checked against the brute-force oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SelfTestReport {
    pub alpha: f64,
    pub beta: f64,
    pub c_q: f64,
    pub c_a_star: f64,
    pub c_b_star: f64,
    pub strategy: QubitStrategy,
    /// `|c_Q − λ*|` against the oracle maximum.
    pub oracle_delta: f64,
    pub stationarity: StationarityResiduals,
    /// Residual of the cosine quadratic at `c_A*`.
    pub cosine_residual: f64,
    pub low_confidence: bool,
}

pub fn self_test_strategy(alpha: f64, beta: f64) -> Result<SelfTestReport> {
    check_tilts(alpha, beta)?;
    let poly = gen_poly(alpha, beta)?;
    let c_q = poly.largest_real_root;
    let (c_a, c_b) = optimal_cosines(alpha, beta, c_q)?;
    let strategy = QubitStrategy::from_cosines(c_a, c_b, alpha, beta)?;
    let oracle = oracle_max(alpha, beta, SELF_TEST_ORACLE_GRID, 1e-10)?;
    let cosine_residual = if alpha == beta {
        eval_poly(&symmetric_cosine_polynomial(alpha, c_q), c_a)
    } else {
        eval_poly(&cosine_polynomial(alpha, beta, c_q), c_a)
    };
    Ok(SelfTestReport {
        alpha,
        beta,
        c_q,
        c_a_star: c_a,
        c_b_star: c_b,
        strategy,
        oracle_delta: (c_q - oracle.lambda).abs(),
        stationarity: stationarity_residuals(c_a, c_b, c_q, alpha, beta),
        cosine_residual,
        low_confidence: poly.low_confidence,
    })
}
