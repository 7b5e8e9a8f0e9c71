//! Small dense linear-algebra kernels: cyclic Jacobi eigendecomposition of
//! small symmetric matrices and the closed-form 2×2 singular values.

/// Maximum number of full Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 30;

/// Off-diagonal Frobenius norm below which the Jacobi iteration stops.
pub const JACOBI_TOLERANCE: f64 = 1e-14;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricEigen<const N: usize> {
    /// Eigenvalues sorted in descending order.
    pub values: [f64; N],
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: [[f64; N]; N],
    pub sweeps: usize,
}

fn off_diagonal_norm<const N: usize>(a: &[[f64; N]; N]) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                s += v * v;
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi rotations on a symmetric matrix. Only the upper triangle's
/// symmetry is assumed; callers validate symmetry beforehand.
pub fn jacobi_eigen<const N: usize>(m: &[[f64; N]; N]) -> SymmetricEigen<N> {
    let mut a = *m;
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = m.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs())).max(1.0);
    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS && off_diagonal_norm(&a) >= JACOBI_TOLERANCE * scale {
        sweeps += 1;
        for p in 0..N {
            for q in p + 1..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let mut values = [0.0; N];
    let mut vectors = [[0.0; N]; N];
    for (k, &i) in order.iter().enumerate() {
        values[k] = a[i][i];
        for r in 0..N {
            vectors[k][r] = v[r][i];
        }
    }
    SymmetricEigen {
        values,
        vectors,
        sweeps,
    }
}

/// Singular values `σ₁ ≥ σ₂ ≥ 0` of a real 2×2 matrix `[[a, b], [c, d]]`.
pub fn singular_values_2x2(m: [[f64; 2]; 2]) -> (f64, f64) {
    let [[a, b], [c, d]] = m;
    let s1 = ((a + d).powi(2) + (b - c).powi(2)).sqrt();
    let s2 = ((a - d).powi(2) + (b + c).powi(2)).sqrt();
    let hi = 0.5 * (s1 + s2);
    let lo = 0.5 * (s1 - s2).abs();
    (hi, lo)
}

pub fn mat_vec<const N: usize>(m: &[[f64; N]; N], v: &[f64; N]) -> [f64; N] {
    let mut out = [0.0; N];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(v).map(|(x, y)| x * y).sum();
    }
    out
}
