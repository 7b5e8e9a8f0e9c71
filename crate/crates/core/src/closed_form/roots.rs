//! Real roots of small real polynomials: balanced companion-matrix
//! eigenvalues followed by Newton polishing.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qubit::eval_poly;

/// Largest supported degree.
pub const MAX_DEGREE: usize = 8;

/// Eigenvalues with `|Im| ≤ IMAG_TOLERANCE·max(1, |z|)` are taken as real.
pub const IMAG_TOLERANCE: f64 = 1e-8;

/// Newton polishing target: `|p(r)| ≤ POLISH_TOLERANCE·Σ|c_k||r|^k`.
pub const POLISH_TOLERANCE: f64 = 1e-12;

/// Near-real eigenvalues up to this imaginary part are tested as possible
/// split multiple roots.
const RESCUE_IMAG: f64 = 1e-3;

/// Residual accepted for a rescued near-real eigenvalue.
const RESCUE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RootReport {
    /// Distinct real roots, ascending.
    pub roots: Vec<f64>,
    /// Whether some candidate roots were merged (a repeated root).
    pub multiplicity_collapsed: bool,
}

/// `Σ|c_k||x|^k`, the natural scale of rounding errors in `p(x)`.
pub fn eval_scale(coeffs: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    coeffs.iter().rev().fold(0.0, |acc, c| acc * ax + c.abs())
}

fn eval_derivative(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)
}

fn residual_ratio(coeffs: &[f64], x: f64) -> f64 {
    let s = eval_scale(coeffs, x);
    if s == 0.0 {
        0.0
    } else {
        eval_poly(coeffs, x).abs() / s
    }
}

/// Newton iteration that only accepts steps decreasing `|p|`.
fn polish(coeffs: &[f64], mut x: f64) -> f64 {
    let mut fx = eval_poly(coeffs, x).abs();
    for _ in 0..100 {
        if fx <= POLISH_TOLERANCE * eval_scale(coeffs, x) {
            break;
        }
        let d = eval_derivative(coeffs, x);
        if d == 0.0 {
            break;
        }
        let mut step = eval_poly(coeffs, x) / d;
        let mut accepted = false;
        for _ in 0..30 {
            let y = x - step;
            let fy = eval_poly(coeffs, y).abs();
            if fy < fx {
                x = y;
                fx = fy;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    x
}

/// Parlett–Reinsch diagonal balancing (radix 2) of a dense square matrix.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// All real roots of the polynomial with ascending coefficients `coeffs`.
pub fn real_roots(coeffs: &[f64]) -> Result<Vec<f64>> {
    real_roots_report(coeffs).map(|r| r.roots)
}

/// [`real_roots`] together with the repeated-root flag.
pub fn real_roots_report(coeffs: &[f64]) -> Result<RootReport> {
    let degree = coeffs.len().saturating_sub(1);
    if degree > MAX_DEGREE {
        return Err(Error::DegreeTooLarge(degree));
    }
    let lead = *coeffs.last().ok_or(Error::DegenerateLeadingCoefficient)?;
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::DegenerateLeadingCoefficient);
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("polynomial coefficients must be finite".into()));
    }
    if degree == 0 {
        return Ok(RootReport {
            roots: vec![],
            multiplicity_collapsed: false,
        });
    }

    // Companion matrix of the monic polynomial, last column holding -c_k/c_n.
    let mut m = DMatrix::<f64>::zeros(degree, degree);
    for i in 1..degree {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..degree {
        m[(i, degree - 1)] = -coeffs[i] / lead;
    }
    balance(&mut m);
    let eig = m.complex_eigenvalues();

    let mut candidates = Vec::new();
    for z in eig.iter() {
        let size = z.norm().max(1.0);
        if z.im.abs() <= IMAG_TOLERANCE * size {
            candidates.push(polish(coeffs, z.re));
        } else if z.im.abs() <= RESCUE_IMAG * size {
            let x = polish(coeffs, z.re);
            if residual_ratio(coeffs, x) <= RESCUE_TOLERANCE {
                candidates.push(x);
            }
        }
    }
    candidates.sort_by(f64::total_cmp);

    // Merge candidates that are numerically the same (repeated) root.
    let mut roots: Vec<f64> = Vec::new();
    let mut collapsed = false;
    let mut cluster: Vec<f64> = Vec::new();
    let flush = |cluster: &mut Vec<f64>, roots: &mut Vec<f64>| {
        if !cluster.is_empty() {
            let mean = cluster.iter().sum::<f64>() / cluster.len() as f64;
            let best = cluster
                .iter()
                .copied()
                .chain(std::iter::once(mean))
                .min_by(|a, b| residual_ratio(coeffs, *a).total_cmp(&residual_ratio(coeffs, *b)))
                .unwrap_or(mean);
            roots.push(best);
            cluster.clear();
        }
    };
    for x in candidates {
        if let Some(&prev) = cluster.last() {
            let close = (x - prev).abs() <= 1e-12 * x.abs().max(1.0);
            let mid = 0.5 * (x + prev);
            let same = close
                || ((x - prev).abs() <= 1e-3 * x.abs().max(1.0)
                    && residual_ratio(coeffs, mid) <= RESCUE_TOLERANCE);
            if same {
                cluster.push(x);
                collapsed = true;
                continue;
            }
            flush(&mut cluster, &mut roots);
        }
        cluster.push(x);
    }
    flush(&mut cluster, &mut roots);
    Ok(RootReport {
        roots,
        multiplicity_collapsed: collapsed,
    })
}
