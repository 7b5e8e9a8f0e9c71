//! Dense primal-dual interior-point solver for moment-matrix SDPs of the form
//!
//! ```text
//! maximize  bᵀy   subject to   Γ(y) = I + Σ_k y_k F_k ⪰ 0,
//! ```
//!
//! where each `F_k` is the symmetric 0/1 pattern of one equality class of
//! moment-matrix cells. The primal problem is
//! `minimize tr X subject to ⟨F_k, X⟩ = −b_k, X ⪰ 0`.
//!
//! The iteration keeps `S = Γ(y)` exactly dual feasible, starts from the
//! infeasible primal point `X = I`, and uses the HKM search direction with
//! Mehrotra's predictor-corrector. Because every moment `y_k` is a
//! correlation of unitary observables, `|y_k| ≤ 1`, so any `X ≻ 0` with
//! primal residual `r` certifies the upper bound `tr X + ‖r‖₁`.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

/// Iteration limit.
pub const MAX_ITERATIONS: usize = 200;

/// Fraction of the distance to the PSD boundary taken per step.
const STEP_FRACTION: f64 = 0.98;

/// Steps shorter than this on both sides for several iterations stop the solve.
const STALL_STEP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    IllConditioned,
}

/// Outcome of a solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SdpSolution {
    /// Certified upper bound `tr X + ‖r‖₁` (best over all iterates).
    pub upper_bound: f64,
    /// `bᵀy` of the final dual point, a value attained by a feasible moment matrix.
    pub lower_bound: f64,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub status: SdpStatus,
    /// `‖⟨F_k, X⟩ + b_k‖₁` at the returned bound.
    pub primal_residual: f64,
}

/// The structure of one SDP: matrix size, per-variable cell patterns and
/// objective.
pub(crate) struct SdpInput<'a> {
    pub n: usize,
    /// `patterns[k]` lists every cell `(p, q)` of `F_k` (both orientations).
    pub patterns: &'a [Vec<(usize, usize)>],
    pub b: &'a [f64],
}

fn gamma(input: &SdpInput, y: &[f64]) -> DMatrix<f64> {
    let mut s = DMatrix::<f64>::identity(input.n, input.n);
    for (cells, &yk) in input.patterns.iter().zip(y) {
        for &(p, q) in cells {
            s[(p, q)] += yk;
        }
    }
    s
}

fn pattern_inner(cells: &[(usize, usize)], m: &DMatrix<f64>) -> f64 {
    cells.iter().map(|&(p, q)| m[(p, q)]).sum()
}

/// Largest `t ≤ 1` keeping `X + tΔ ⪰ 0` (scaled by the step fraction), from
/// the spectrum of `L⁻¹ Δ L⁻ᵀ` with `X = LLᵀ`.
fn max_step(chol: &Cholesky<f64, nalgebra::Dyn>, delta: &DMatrix<f64>) -> Option<f64> {
    let l = chol.l();
    let a = l.solve_lower_triangular(delta)?;
    let b = l.solve_lower_triangular(&a.transpose())?;
    let sym = (&b + b.transpose()) * 0.5;
    let min_eig = sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if !min_eig.is_finite() {
        return None;
    }
    Some(if min_eig >= 0.0 {
        1.0
    } else {
        (-STEP_FRACTION / min_eig).min(1.0)
    })
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Schur complement `M_ij = tr(F_i X F_j S⁻¹)`.
fn schur_matrix(input: &SdpInput, x: &DMatrix<f64>, s_inv: &DMatrix<f64>) -> DMatrix<f64> {
    let m = input.patterns.len();
    let mut out = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = 0.0;
            for &(p, q) in &input.patterns[i] {
                for &(r, s) in &input.patterns[j] {
                    acc += x[(p, r)] * s_inv[(s, q)];
                }
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    out
}

enum SchurFactor {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Self {
        match Cholesky::new(m.clone()) {
            Some(c) => SchurFactor::Chol(c),
            None => SchurFactor::Lu(m.lu()),
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            SchurFactor::Chol(c) => Some(c.solve(rhs)),
            SchurFactor::Lu(l) => l.solve(rhs),
        }
    }
}

struct Direction {
    dy: DVector<f64>,
    ds: DMatrix<f64>,
    dx: DMatrix<f64>,
}

fn direction(
    input: &SdpInput,
    factor: &SchurFactor,
    x: &DMatrix<f64>,
    s_inv: &DMatrix<f64>,
    sigma_mu: f64,
    second_order: Option<&DMatrix<f64>>,
) -> Option<Direction> {
    // R = σμS⁻¹ − G; the Newton right-hand side is b_k + ⟨F_k, R⟩.
    let mut r = s_inv * sigma_mu;
    if let Some(g) = second_order {
        r -= g;
    }
    let rhs = DVector::from_iterator(
        input.b.len(),
        input.patterns.iter().zip(input.b).map(|(cells, bk)| bk + pattern_inner(cells, &r)),
    );
    let dy = factor.solve(&rhs)?;
    if dy.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut ds = DMatrix::<f64>::zeros(input.n, input.n);
    for (cells, &d) in input.patterns.iter().zip(dy.iter()) {
        for &(p, q) in cells {
            ds[(p, q)] += d;
        }
    }
    // ΔX = σμS⁻¹ − X − X ΔS S⁻¹ − G, symmetrized.
    let mut dx = r - x - x * &ds * s_inv;
    symmetrize(&mut dx);
    Some(Direction { dy, ds, dx })
}

pub(crate) fn solve(input: &SdpInput, tol: f64) -> SdpSolution {
    let n = input.n;
    let m = input.patterns.len();
    let mut y = vec![0.0; m];
    let mut x = DMatrix::<f64>::identity(n, n);
    let mut best_upper = f64::INFINITY;
    let mut best_residual = f64::NAN;
    let mut status = SdpStatus::MaxIter;
    let mut iterations = 0;
    let mut stalled = 0;
    let mut prev_y = y.clone();

    for it in 0..=MAX_ITERATIONS {
        iterations = it;
        let s = gamma(input, &y);
        let Some(s_chol) = Cholesky::new(s.clone()) else {
            y = prev_y;
            status = SdpStatus::IllConditioned;
            break;
        };
        let Some(x_chol) = Cholesky::new(x.clone()) else {
            status = SdpStatus::IllConditioned;
            break;
        };
        let s_inv = s_chol.inverse();

        let residual: f64 = input
            .patterns
            .iter()
            .zip(input.b)
            .map(|(cells, bk)| (bk + pattern_inner(cells, &x)).abs())
            .sum();
        let upper = x.trace() + residual;
        if upper < best_upper {
            best_upper = upper;
            best_residual = residual;
        }
        let lower: f64 = input.b.iter().zip(&y).map(|(b, v)| b * v).sum();
        if best_upper - lower <= tol * (1.0 + lower.abs()) {
            status = SdpStatus::Optimal;
            break;
        }
        if it == MAX_ITERATIONS {
            break;
        }

        let mu = x.dot(&s) / n as f64;
        let factor = SchurFactor::new(schur_matrix(input, &x, &s_inv));

        let Some(pred) = direction(input, &factor, &x, &s_inv, 0.0, None) else {
            status = SdpStatus::IllConditioned;
            break;
        };
        let (Some(ap), Some(ad)) = (max_step(&x_chol, &pred.dx), max_step(&s_chol, &pred.ds)) else {
            status = SdpStatus::IllConditioned;
            break;
        };
        let x_aff = &x + &pred.dx * ap;
        let s_aff = &s + &pred.ds * ad;
        let mu_aff = x_aff.dot(&s_aff) / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let g = &pred.dx * &pred.ds * &s_inv;
        let Some(corr) = direction(input, &factor, &x, &s_inv, sigma * mu, Some(&g)) else {
            status = SdpStatus::IllConditioned;
            break;
        };
        let (Some(ap), Some(ad)) = (max_step(&x_chol, &corr.dx), max_step(&s_chol, &corr.ds)) else {
            status = SdpStatus::IllConditioned;
            break;
        };
        x += &corr.dx * ap;
        symmetrize(&mut x);
        prev_y.clone_from(&y);
        for (v, d) in y.iter_mut().zip(corr.dy.iter()) {
            *v += ad * d;
        }

        if ap < STALL_STEP && ad < STALL_STEP {
            stalled += 1;
            if stalled >= 3 {
                status = SdpStatus::IllConditioned;
                break;
            }
        } else {
            stalled = 0;
        }
    }

    let s = gamma(input, &y);
    let lower = if Cholesky::new(s).is_some() {
        input.b.iter().zip(&y).map(|(b, v)| b * v).sum()
    } else {
        f64::NEG_INFINITY
    };
    SdpSolution {
        upper_bound: best_upper,
        lower_bound: lower,
        y,
        iterations,
        status,
        primal_residual: best_residual,
    }
}
