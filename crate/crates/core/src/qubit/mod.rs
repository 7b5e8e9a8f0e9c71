//! Two-qubit strategies for the doubly-tilted CHSH functional
//! `C + α⟨A_0⟩ + β⟨B_0⟩`.
//!
//! By Jordan's lemma the observables can be taken as `A_0 = Z`,
//! `A_1 = c_A Z + s_A X` and likewise for Bob, with `s = +√(1−c²)`. The
//! resulting 4×4 Bell operator is real symmetric in the basis
//! `|00⟩, |01⟩, |10⟩, |11⟩`.

mod oracle;

pub use oracle::{oracle_max, oracle_max_with, OracleDomain, OracleResult};

use serde::Serialize;

use crate::bell::{behavior_from_correlators, Behavior, CorrelatorSet};
use crate::closed_form;
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, mat_vec, singular_values_2x2};

pub type Matrix4 = [[f64; 4]; 4];
type Matrix2 = [[f64; 2]; 2];

const PAULI_Z: Matrix2 = [[1.0, 0.0], [0.0, -1.0]];
const IDENTITY2: Matrix2 = [[1.0, 0.0], [0.0, 1.0]];

/// Symmetry tolerance accepted by [`max_eigenpair`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

fn kron(p: &Matrix2, q: &Matrix2) -> Matrix4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = p[i][j] * q[k][l];
                }
            }
        }
    }
    out
}

fn add_scaled(acc: &mut Matrix4, m: &Matrix4, w: f64) {
    for (ra, rm) in acc.iter_mut().zip(m) {
        for (a, v) in ra.iter_mut().zip(rm) {
            *a += w * v;
        }
    }
}

/// Dichotomic observable `c Z + √(1−c²) X`.
fn observable(c: f64) -> Matrix2 {
    let s = (1.0 - c * c).max(0.0).sqrt();
    [[c, s], [s, -c]]
}

fn check_cosine(name: &'static str, value: f64, lo: f64) -> Result<()> {
    if !(lo..=1.0).contains(&value) {
        return Err(Error::CosineOutOfRange { name, value });
    }
    Ok(())
}

/// Local observables `[A_0, A_1]` and `[B_0, B_1]` for the given cosines.
pub fn observables(c_a: f64, c_b: f64) -> ([Matrix2; 2], [Matrix2; 2]) {
    (
        [PAULI_Z, observable(c_a)],
        [PAULI_Z, observable(c_b)],
    )
}

/// Bell operator without range validation; cosines in `[-1, 1]`.
pub(crate) fn operator_unchecked(c_a: f64, c_b: f64, alpha: f64, beta: f64) -> Matrix4 {
    let (a, b) = observables(c_a, c_b);
    let mut m = [[0.0; 4]; 4];
    for x in 0..2 {
        for y in 0..2 {
            let sign = if x * y == 1 { -1.0 } else { 1.0 };
            add_scaled(&mut m, &kron(&a[x], &b[y]), sign);
        }
    }
    add_scaled(&mut m, &kron(&a[0], &IDENTITY2), alpha);
    add_scaled(&mut m, &kron(&IDENTITY2, &b[0]), beta);
    m
}

/// Tilted CHSH operator `Σ(−1)^{xy} A_x⊗B_y + α A_0⊗I + β I⊗B_0`.
pub fn bell_operator(c_a: f64, c_b: f64, alpha: f64, beta: f64) -> Result<Matrix4> {
    check_cosine("c_A", c_a, 0.0)?;
    check_cosine("c_B", c_b, 0.0)?;
    Ok(operator_unchecked(c_a, c_b, alpha, beta))
}

/// Characteristic polynomial `det(λI − M)` of [`bell_operator`], ascending
/// coefficients `[q_0, q_1, q_2, q_3, q_4]` (monic, `q_3 = 0`).
pub fn char_poly(c_a: f64, c_b: f64, alpha: f64, beta: f64) -> [f64; 5] {
    let (a2, b2) = (alpha * alpha, beta * beta);
    let q0 = 8.0 * b2 * c_a * (c_b * c_b - 1.0) - 8.0 * c_b * (a2 + (b2 - 2.0) * c_b)
        + (a2 - b2).powi(2)
        + 8.0 * c_a * c_a * (c_b - 1.0) * (a2 - 2.0 * c_b - 2.0);
    let q1 = 8.0 * alpha * beta * (c_a * (c_b - 1.0) - c_b - 1.0);
    let q2 = -2.0 * (a2 + b2 + 4.0);
    [q0, q1, q2, 0.0, 1.0]
}

/// `(∂q/∂c_A, ∂q/∂c_B)` of the characteristic polynomial at `λ`.
pub fn char_poly_gradient(c_a: f64, c_b: f64, lambda: f64, alpha: f64, beta: f64) -> (f64, f64) {
    let r = reduced_equations(c_a, c_b, lambda, alpha, beta);
    (8.0 * (c_b - 1.0) * r.0, 8.0 * (c_a - 1.0) * r.1)
}

/// Stationarity conditions with the factors `8(c_B − 1)` and `8(c_A − 1)`
/// divided out of `∂q/∂c_A` and `∂q/∂c_B` respectively. They are written in
/// polynomial form, so they stay defined at `c = 1`.
fn reduced_equations(c_a: f64, c_b: f64, lambda: f64, alpha: f64, beta: f64) -> (f64, f64) {
    let (a2, b2) = (alpha * alpha, beta * beta);
    let ab = alpha * beta * lambda;
    let ra = (b2 - 4.0 * c_a) * (1.0 + c_b) + 2.0 * a2 * c_a + ab;
    let rb = a2 * (1.0 + c_a) - 4.0 * c_b * (1.0 + c_a) + 2.0 * b2 * c_b + ab;
    (ra, rb)
}

/// Horner evaluation of an ascending coefficient vector.
pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Residuals of the stationarity system at `(c_A, c_B, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StationarityResiduals {
    /// `q(λ; c_A, c_B)`.
    pub char_poly: f64,
    pub d_c_a: f64,
    pub d_c_b: f64,
    /// `∂q/∂c_A / (8(c_B − 1))`.
    pub reduced_a: f64,
    /// `∂q/∂c_B / (8(c_A − 1))`.
    pub reduced_b: f64,
}

impl StationarityResiduals {
    pub fn as_array(&self) -> [f64; 5] {
        [self.char_poly, self.d_c_a, self.d_c_b, self.reduced_a, self.reduced_b]
    }

    pub fn max_abs(&self) -> f64 {
        self.as_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn stationarity_residuals(
    c_a: f64,
    c_b: f64,
    lambda: f64,
    alpha: f64,
    beta: f64,
) -> StationarityResiduals {
    let (reduced_a, reduced_b) = reduced_equations(c_a, c_b, lambda, alpha, beta);
    StationarityResiduals {
        char_poly: eval_poly(&char_poly(c_a, c_b, alpha, beta), lambda),
        d_c_a: 8.0 * (c_b - 1.0) * reduced_a,
        d_c_b: 8.0 * (c_a - 1.0) * reduced_b,
        reduced_a,
        reduced_b,
    }
}

/// Spectrum of a 4×4 symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectralResult {
    /// Sorted in descending order.
    pub eigenvalues: [f64; 4],
    /// Unit eigenvector of the largest eigenvalue, first nonzero component positive.
    pub top_vector: [f64; 4],
    /// `λ_max − λ_second`.
    pub gap: f64,
    /// `‖Mv − λv‖` for the top pair.
    pub residual: f64,
}

pub fn max_eigenpair(m: &Matrix4) -> Result<SpectralResult> {
    let scale = m.iter().flatten().fold(1.0f64, |s, x| s.max(x.abs()));
    let mut asym = 0.0f64;
    for i in 0..4 {
        for j in i + 1..4 {
            asym = asym.max((m[i][j] - m[j][i]).abs());
        }
    }
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::NonSymmetric(asym));
    }
    let e = jacobi_eigen(m);
    let mut v = e.vectors[0];
    if let Some(first) = v.iter().copied().find(|c| c.abs() > 1e-12) {
        if first < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
    let mv = mat_vec(m, &v);
    let residual = mv
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - e.values[0] * b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(SpectralResult {
        eigenvalues: e.values,
        top_vector: v,
        gap: e.values[0] - e.values[1],
        residual,
    })
}

/// Largest eigenvalue of the tilted operator, with cosines in `[-1, 1]`.
pub fn lambda_max(c_a: f64, c_b: f64, alpha: f64, beta: f64) -> f64 {
    jacobi_eigen(&operator_unchecked(c_a, c_b, alpha, beta)).values[0]
}

/// A two-qubit strategy: measurement cosines and the top eigenvector of the
/// corresponding Bell operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct QubitStrategy {
    pub alpha: f64,
    pub beta: f64,
    pub c_a: f64,
    pub c_b: f64,
    /// Amplitudes on `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub state: [f64; 4],
    /// Larger Schmidt coefficient, in `[1/√2, 1]`.
    pub schmidt: f64,
    pub lambda: f64,
    pub gap: f64,
}

impl QubitStrategy {
    /// Strategy given by the top eigenvector of `bell_operator(c_A, c_B, α, β)`.
    pub fn from_cosines(c_a: f64, c_b: f64, alpha: f64, beta: f64) -> Result<Self> {
        let m = bell_operator(c_a, c_b, alpha, beta)?;
        let spec = max_eigenpair(&m)?;
        let v = spec.top_vector;
        let (schmidt, _) = singular_values_2x2([[v[0], v[1]], [v[2], v[3]]]);
        Ok(QubitStrategy {
            alpha,
            beta,
            c_a,
            c_b,
            state: v,
            schmidt,
            lambda: spec.eigenvalues[0],
            gap: spec.gap,
        })
    }

    fn expectation(&self, op: &Matrix4) -> f64 {
        let mv = mat_vec(op, &self.state);
        mv.iter().zip(&self.state).map(|(a, b)| a * b).sum()
    }

    /// Correlators and marginals produced by measuring the state.
    pub fn correlators(&self) -> CorrelatorSet {
        let (a, b) = observables(self.c_a, self.c_b);
        let mut c = CorrelatorSet::zero();
        for x in 0..2 {
            for y in 0..2 {
                c.exy[x][y] = self.expectation(&kron(&a[x], &b[y]));
            }
            c.ax[x] = self.expectation(&kron(&a[x], &IDENTITY2));
            c.by[x] = self.expectation(&kron(&IDENTITY2, &b[x]));
        }
        for v in c.exy.iter_mut().flatten().chain(c.ax.iter_mut()).chain(c.by.iter_mut()) {
            *v = v.clamp(-1.0, 1.0);
        }
        c
    }

    pub fn behavior(&self) -> Result<Behavior> {
        behavior_from_correlators(&self.correlators())
    }
}

/// The strategy maximizing `C + α⟨A_0⟩ + β⟨B_0⟩`, using the closed-form
/// maximal value and optimal cosines.
pub fn optimal_state(alpha: f64, beta: f64) -> Result<QubitStrategy> {
    closed_form::check_tilts(alpha, beta)?;
    let c_q = closed_form::max_quantum_value(alpha, beta)?;
    let (c_a, c_b) = closed_form::optimal_cosines(alpha, beta, c_q)?;
    QubitStrategy::from_cosines(c_a, c_b, alpha, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::BellFunctional;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    #[test]
    fn chsh_operator_spectrum() {
        let m = bell_operator(0.0, 0.0, 0.0, 0.0).unwrap();
        let s = max_eigenpair(&m).unwrap();
        let expect = [2.0 * SQRT_2, 0.0, 0.0, -2.0 * SQRT_2];
        for (a, b) in s.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn commuting_observables_are_classical() {
        let m = bell_operator(1.0, 1.0, 0.3, 0.7).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(m[i][j], 0.0);
                }
            }
        }
        assert!((lambda_max(1.0, 1.0, 0.3, 0.7) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn top_left_entry() {
        let (ca, cb, a) = (0.3, 0.6, 0.4);
        let m = bell_operator(ca, cb, a, a).unwrap();
        let omega = 1.0 + ca + cb - ca * cb;
        assert!((m[0][0] - (omega + 2.0 * a)).abs() < 1e-15);
    }

    #[test]
    fn cosine_range_checked() {
        assert!(matches!(
            bell_operator(1.1, 0.0, 0.0, 0.0),
            Err(Error::CosineOutOfRange { name: "c_A", .. })
        ));
        assert!(matches!(
            bell_operator(0.0, -0.1, 0.0, 0.0),
            Err(Error::CosineOutOfRange { name: "c_B", .. })
        ));
    }

    #[test]
    fn char_poly_examples() {
        let q = char_poly(0.0, 0.0, 0.0, 0.0);
        assert_eq!(q, [0.0, 0.0, -8.0, 0.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (ca, cb) = (rng.random::<f64>(), rng.random::<f64>());
            let (a, b) = (2.0 * rng.random::<f64>(), 2.0 * rng.random::<f64>());
            let q = char_poly(ca, cb, a, b);
            assert_eq!(q[3], 0.0);
            let s = max_eigenpair(&bell_operator(ca, cb, a, b).unwrap()).unwrap();
            for l in s.eigenvalues {
                assert!(eval_poly(&q, l).abs() < 1e-8, "{ca} {cb} {a} {b}");
            }
        }
    }

    #[test]
    fn symmetric_char_poly_matches_published_form() {
        // At α = β the coefficients collapse to the symmetric closed form.
        let (ca, cb, a): (f64, f64, f64) = (0.27, 0.81, 0.62);
        let a2 = a * a;
        let q = char_poly(ca, cb, a, a);
        assert!((q[2] - (-4.0 * a2 - 8.0)).abs() < 1e-13);
        assert!((q[1] - 8.0 * a2 * (ca * (cb - 1.0) - cb - 1.0)).abs() < 1e-13);
        let q0 = 8.0 * a2 * ca * (cb * cb - 1.0) - 8.0 * cb * (a2 + (a2 - 2.0) * cb)
            + 8.0 * ca * ca * (cb - 1.0) * (a2 - 2.0 * cb - 2.0);
        assert!((q[0] - q0).abs() < 1e-13);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        for _ in 0..100 {
            let (ca, cb) = (0.1 + 0.8 * rng.random::<f64>(), 0.1 + 0.8 * rng.random::<f64>());
            let (a, b) = (1.5 * rng.random::<f64>(), 1.5 * rng.random::<f64>());
            let l = 4.0 * rng.random::<f64>() - 2.0;
            let q = |x: f64, y: f64| eval_poly(&char_poly(x, y, a, b), l);
            let fa = (q(ca + h, cb) - q(ca - h, cb)) / (2.0 * h);
            let fb = (q(ca, cb + h) - q(ca, cb - h)) / (2.0 * h);
            let (ga, gb) = char_poly_gradient(ca, cb, l, a, b);
            assert!((ga - fa).abs() <= 1e-5 * ga.abs().max(1.0));
            assert!((gb - fb).abs() <= 1e-5 * gb.abs().max(1.0));
        }
    }

    #[test]
    fn reduced_difference_on_diagonal() {
        let (ca, cb, l, a) = (0.2, 0.7, 3.1, 0.6);
        let r = stationarity_residuals(ca, cb, l, a, a);
        let d = r.reduced_a - r.reduced_b;
        assert!((d - (a * a - 4.0) * (ca - cb)).abs() < 1e-13);
    }

    #[test]
    fn generic_point_is_not_stationary() {
        let r = stationarity_residuals(0.3, 0.8, 2.9, 0.4, 0.7);
        assert!(r.max_abs() > 1e-3);
    }

    #[test]
    fn eigenpair_examples() {
        let id = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let s = max_eigenpair(&id).unwrap();
        assert_eq!(s.eigenvalues, [1.0; 4]);
        assert_eq!(s.gap, 0.0);

        let mut d = [[0.0; 4]; 4];
        for (i, v) in [4.0, 1.0, 0.0, -1.0].into_iter().enumerate() {
            d[i][i] = v;
        }
        let s = max_eigenpair(&d).unwrap();
        assert_eq!(s.eigenvalues[0], 4.0);
        assert_eq!(s.top_vector, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.gap, 3.0);

        d[0][1] = 1e-6;
        assert!(matches!(max_eigenpair(&d), Err(Error::NonSymmetric(_))));
    }

    #[test]
    fn spectrum_matches_largest_root_of_char_poly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (ca, cb) = (rng.random::<f64>(), rng.random::<f64>());
            let (a, b) = (2.0 * rng.random::<f64>(), 2.0 * rng.random::<f64>());
            let q = char_poly(ca, cb, a, b);
            let roots = closed_form::real_roots(&q).unwrap();
            let lm = lambda_max(ca, cb, a, b);
            assert!((roots.last().unwrap() - lm).abs() < 1e-9);
        }
    }

    #[test]
    fn chsh_optimal_state_is_maximally_entangled() {
        let s = optimal_state(0.0, 0.0).unwrap();
        assert!(s.c_a.abs() < 1e-12 && s.c_b.abs() < 1e-12);
        assert!((s.schmidt - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((s.lambda - 2.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn schmidt_grows_with_tilt() {
        let s = optimal_state(0.5, 0.5).unwrap();
        assert!(s.schmidt > FRAC_1_SQRT_2 + 1e-6 && s.schmidt < 1.0);
        let t = optimal_state(0.9, 0.9).unwrap();
        assert!(t.schmidt > s.schmidt);
        let u = optimal_state(0.999, 0.999).unwrap();
        assert!(u.schmidt > 0.98);
    }

    #[test]
    fn boundary_rejected() {
        assert!(matches!(
            optimal_state(1.0, 1.0),
            Err(Error::BoundaryDegenerate(_))
        ));
    }

    #[test]
    fn optimal_behavior_reaches_value() {
        for &(a, b) in &[(0.0, 0.0), (0.5, 0.5), (0.3, 1.1), (1.2, 0.1), (6.0 / 17.0, 6.0 / 17.0)] {
            let s = optimal_state(a, b).unwrap();
            let p = s.behavior().unwrap();
            let f = crate::tilting::tilted_chsh_from_tilts(a, b).unwrap();
            let v = f.functional().evaluate(&p).unwrap();
            let cq = closed_form::max_quantum_value(a, b).unwrap();
            assert!((v - cq).abs() < 1e-9, "({a},{b}): {v} vs {cq}");
            assert!(p.is_no_signaling());
            let _ = BellFunctional::chsh().evaluate(&p).unwrap();
        }
    }
}
