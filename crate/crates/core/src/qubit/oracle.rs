//! Brute-force maximization of the largest eigenvalue over measurement
//! cosines: a coarse grid followed by Nelder–Mead refinement.

use rayon::prelude::*;
use serde::Serialize;

use super::lambda_max;
use crate::error::{Error, Result};

/// Upper clamp on cosines during the search.
pub const COSINE_CEILING: f64 = 1.0 - 1e-9;

const MAX_SIMPLEX_ITERATIONS: usize = 5000;

/// Search domain for the cosines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleDomain {
    /// `(c_A, c_B) ∈ [0, 1−1e-9]²`.
    Unit,
    /// `(c_A, c_B) ∈ [−1+1e-9, 1−1e-9]²`, used for functionals whose tilts
    /// have mixed signs.
    Full,
}

impl OracleDomain {
    fn bounds(self) -> (f64, f64) {
        match self {
            OracleDomain::Unit => (0.0, COSINE_CEILING),
            OracleDomain::Full => (-COSINE_CEILING, COSINE_CEILING),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleResult {
    pub c_a: f64,
    pub c_b: f64,
    pub lambda: f64,
    pub evaluations: usize,
}

/// Maximizes `λ_max(bell_operator(c_A, c_B, α, β))` over `[0, 1)²`.
pub fn oracle_max(alpha: f64, beta: f64, grid_n: usize, refine_tol: f64) -> Result<OracleResult> {
    oracle_max_with(alpha, beta, grid_n, refine_tol, OracleDomain::Unit)
}

/// [`oracle_max`] with an explicit search domain. Deterministic: grid ties
/// are broken by the lexicographically smallest `(c_A, c_B)`.
pub fn oracle_max_with(
    alpha: f64,
    beta: f64,
    grid_n: usize,
    refine_tol: f64,
    domain: OracleDomain,
) -> Result<OracleResult> {
    if grid_n < 32 {
        return Err(Error::InvalidArgument(format!("oracle grid must be at least 32, got {grid_n}")));
    }
    if !(refine_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("refinement tolerance must be positive, got {refine_tol}")));
    }
    let (lo, hi) = domain.bounds();
    let step = (hi - lo) / (grid_n - 1) as f64;
    let at = |i: usize| if i + 1 == grid_n { hi } else { lo + step * i as f64 };

    let values: Vec<(f64, f64, f64)> = (0..grid_n * grid_n)
        .into_par_iter()
        .map(|k| {
            let (ca, cb) = (at(k / grid_n), at(k % grid_n));
            (ca, cb, lambda_max(ca, cb, alpha, beta))
        })
        .collect();
    // Row-major order means the first maximum found is the lexicographically smallest.
    let mut best = values[0];
    for &v in &values[1..] {
        if v.2 > best.2 {
            best = v;
        }
    }

    let clamp = |p: [f64; 2]| [p[0].clamp(lo, hi), p[1].clamp(lo, hi)];
    let objective = |p: [f64; 2]| -lambda_max(p[0], p[1], alpha, beta);
    let mut evaluations = values.len();
    let mut start = [best.0, best.1];
    let mut value = -best.2;
    let mut scale = step;
    // Restart from the refined point until a restart no longer improves it.
    for _ in 0..4 {
        let (p, v, n) = nelder_mead(&objective, &clamp, start, scale, refine_tol);
        evaluations += n;
        let improved = v < value - 1e-15;
        if v <= value {
            start = p;
            value = v;
        }
        if !improved {
            break;
        }
        scale = (scale * 0.1).max(10.0 * refine_tol);
    }
    Ok(OracleResult {
        c_a: start[0],
        c_b: start[1],
        lambda: -value,
        evaluations,
    })
}

/// Minimizes `f` with a clamped Nelder–Mead simplex; stops when the simplex
/// diameter drops below `tol`. Returns `(point, value, evaluations)`.
fn nelder_mead(
    f: &impl Fn([f64; 2]) -> f64,
    clamp: &impl Fn([f64; 2]) -> [f64; 2],
    start: [f64; 2],
    scale: f64,
    tol: f64,
) -> ([f64; 2], f64, usize) {
    let mut evals = 0;
    let mut eval = |p: [f64; 2]| {
        evals += 1;
        f(p)
    };
    let offset = |p: [f64; 2], d: [f64; 2]| {
        let q = clamp([p[0] + d[0], p[1] + d[1]]);
        if q == p {
            clamp([p[0] - d[0], p[1] - d[1]])
        } else {
            q
        }
    };
    let mut simplex = [start, offset(start, [scale, 0.0]), offset(start, [0.0, scale])];
    let mut fv = [eval(simplex[0]), eval(simplex[1]), eval(simplex[2])];

    for _ in 0..MAX_SIMPLEX_ITERATIONS {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| fv[i].total_cmp(&fv[j]));
        simplex = [simplex[idx[0]], simplex[idx[1]], simplex[idx[2]]];
        fv = [fv[idx[0]], fv[idx[1]], fv[idx[2]]];

        let diameter = (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .map(|(i, j)| {
                let d = [simplex[i][0] - simplex[j][0], simplex[i][1] - simplex[j][1]];
                d[0].hypot(d[1])
            })
            .fold(0.0, f64::max);
        if diameter < tol {
            break;
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            clamp([
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ])
        };
        let reflected = along(-1.0);
        let fr = eval(reflected);
        if fr < fv[0] {
            let expanded = along(-2.0);
            let fe = eval(expanded);
            if fe < fr {
                simplex[2] = expanded;
                fv[2] = fe;
            } else {
                simplex[2] = reflected;
                fv[2] = fr;
            }
        } else if fr < fv[1] {
            simplex[2] = reflected;
            fv[2] = fr;
        } else {
            let (contracted, fc) = if fr < fv[2] {
                let c = along(-0.5);
                (c, eval(c))
            } else {
                let c = along(0.5);
                (c, eval(c))
            };
            if fc < fv[2].min(fr) {
                simplex[2] = contracted;
                fv[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = clamp([
                        0.5 * (simplex[0][0] + simplex[k][0]),
                        0.5 * (simplex[0][1] + simplex[k][1]),
                    ]);
                    fv[k] = eval(simplex[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| fv[i].total_cmp(&fv[j])).unwrap_or(0);
    (simplex[best], fv[best], evals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn chsh_oracle() {
        let r = oracle_max(0.0, 0.0, 32, 1e-10).unwrap();
        assert!((r.lambda - 2.0 * SQRT_2).abs() < 1e-9);
        assert!(r.c_a.abs() < 1e-4 && r.c_b.abs() < 1e-4);
    }

    #[test]
    fn single_tilt_oracle() {
        let r = oracle_max(1.0, 0.0, 32, 1e-10).unwrap();
        assert!((r.lambda - 10f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn symmetric_085_oracle() {
        let a = 6.0 / 17.0;
        let r = oracle_max(a, a, 32, 1e-10).unwrap();
        assert!((r.lambda - 2.98098).abs() < 1e-5);
    }

    #[test]
    fn deterministic() {
        let a = oracle_max(0.4, 0.9, 40, 1e-10).unwrap();
        let b = oracle_max(0.4, 0.9, 40, 1e-10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn small_grid_rejected() {
        assert!(oracle_max(0.1, 0.1, 16, 1e-10).is_err());
    }
}
