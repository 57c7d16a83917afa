//! Eigenvalue routines that exploit sign structure.
//!
//! The Perron root of a nonnegative matrix is computed by power iteration,
//! preconditioned by a handful of normalized squarings so that small
//! spectral gaps do not stall convergence. Symmetric problems use cyclic
//! Jacobi rotations.

use super::matrix::{Matrix, DEFAULT_TOL};
use crate::error::{Error, Result};

const POWER_REL_TOL: f64 = 1e-13;
const POWER_STABLE_STEPS: usize = 3;
const POWER_MAX_ITERS: usize = 100_000;
const MAX_SQUARINGS: usize = 60;
const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Entry tolerance used by [`nonneg_inverse_check`].
pub const INVERSE_SIGN_TOL: f64 = 1e-10;

/// Which of the two equivalent inverse-positivity tests to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseForm {
    /// `-A⁻¹ ≥ 0` for a Metzler `A`.
    Continuous,
    /// `(I - B)⁻¹ ≥ 0` for a nonnegative `B`.
    Discrete,
}

pub fn is_metzler(a: &Matrix, tol: f64) -> Result<bool> {
    Ok(a.metzler_violation(tol)?.is_none())
}

/// Perron root and a nonnegative Perron vector (unit 1-norm) of a
/// nonnegative square matrix.
pub fn perron_pair(s: &Matrix) -> Result<(f64, Vec<f64>)> {
    s.require_square()?;
    s.require_nonnegative(0.0)?;
    let n = s.rows();
    if n == 0 {
        return Ok((0.0, Vec::new()));
    }
    let scale = s.max_abs();
    if scale == 0.0 {
        return Ok((0.0, vec![1.0 / n as f64; n]));
    }

    // Squaring phase: columns sums of S^(2^k) approach the Perron direction.
    let mut p = s.scale(1.0 / scale);
    let mut x = normalize_l1(&p.mul_vec(&vec![1.0; n]));
    for _ in 0..MAX_SQUARINGS {
        let sq = &p * &p;
        let m = sq.max_abs();
        if m == 0.0 {
            break;
        }
        p = sq.scale(1.0 / m);
        let next = normalize_l1(&p.mul_vec(&vec![1.0; n]));
        let change: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if change < 1e-15 {
            break;
        }
    }
    if x.iter().sum::<f64>() == 0.0 {
        // nilpotent
        return Ok((0.0, vec![1.0 / n as f64; n]));
    }

    // Plain power iteration on the original matrix.
    let mut lambda = f64::NAN;
    let mut stable = 0;
    for _ in 0..POWER_MAX_ITERS {
        let y = s.mul_vec(&x);
        let sum_y: f64 = y.iter().sum();
        let sum_x: f64 = x.iter().sum();
        if sum_y <= 0.0 {
            return Ok((0.0, x));
        }
        let next = sum_y / sum_x;
        if lambda.is_finite() && (next - lambda).abs() <= POWER_REL_TOL * next.abs().max(f64::MIN_POSITIVE)
        {
            stable += 1;
        } else {
            stable = 0;
        }
        lambda = next;
        x = y.iter().map(|v| v / sum_y).collect();
        if stable >= POWER_STABLE_STEPS {
            return Ok((lambda, x));
        }
    }
    Err(Error::NoConvergence { what: "power iteration", iterations: POWER_MAX_ITERS })
}

fn normalize_l1(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter().map(|x| x / s).collect()
    } else {
        v.to_vec()
    }
}

/// Largest real part of the eigenvalues of a Metzler matrix, i.e. its
/// Perron root. Uses the shift `σ = 1 + max|a_ii|`.
pub fn spectral_abscissa(a: &Matrix) -> Result<f64> {
    Ok(metzler_perron(a)?.0)
}

/// Perron root and nonnegative eigenvector of a Metzler matrix.
pub fn metzler_perron(a: &Matrix) -> Result<(f64, Vec<f64>)> {
    a.require_metzler(0.0)?;
    let sigma = 1.0 + a.diag().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let shifted = a.checked_add(&Matrix::identity(a.rows()).scale(sigma))?;
    let (root, vec) = perron_pair(&shifted)?;
    Ok((root - sigma, vec))
}

/// Spectral radius of a nonnegative matrix.
pub fn spectral_radius(b: &Matrix) -> Result<f64> {
    b.require_square()?;
    b.require_nonnegative(0.0)?;
    // Shifting by a positive multiple of I makes every irreducible block
    // primitive without moving the Perron root relative to the rest.
    let sigma = b.norm_inf();
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let shifted = b.checked_add(&Matrix::identity(b.rows()).scale(sigma))?;
    let (root, _) = perron_pair(&shifted)?;
    Ok((root - sigma).max(0.0))
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Matrix,
}

impl SymmetricEigen {
    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::INFINITY)
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.col(k)
    }
}

/// Cyclic Jacobi eigen-decomposition.
pub fn symmetric_eigen(s: &Matrix) -> Result<SymmetricEigen> {
    symmetric_eigen_tol(s, DEFAULT_TOL)
}

pub fn symmetric_eigen_tol(s: &Matrix, sym_tol: f64) -> Result<SymmetricEigen> {
    s.require_square()?;
    let asym = s.asymmetry();
    if asym > sym_tol * s.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let n = s.rows();
    let mut a = s.symmetrize();
    let mut v = Matrix::identity(n);
    let frob: f64 = a.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = JACOBI_REL_TOL * frob.max(f64::MIN_POSITIVE);

    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "Jacobi eigensolver", iterations: JACOBI_MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen { values, vectors })
}

/// Sorted (ascending) eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(s: &Matrix) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(s)?.values)
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(s: &Matrix) -> Result<f64> {
    Ok(symmetric_eigen(s)?.max())
}

/// Inverse-positivity test: `-A⁻¹ ≥ 0` (continuous) or `(I - A)⁻¹ ≥ 0`
/// (discrete), entrywise up to [`INVERSE_SIGN_TOL`].
pub fn nonneg_inverse_check(a: &Matrix, form: InverseForm) -> Result<bool> {
    a.require_square()?;
    let m = match form {
        InverseForm::Continuous => -&a.inverse()?,
        InverseForm::Discrete => (&Matrix::identity(a.rows()) - a).inverse()?,
    };
    Ok(m.is_nonnegative(INVERSE_SIGN_TOL))
}

/// Rank by Gaussian elimination with full pivoting and a relative
/// threshold.
pub fn rank(m: &Matrix, rel_tol: f64) -> usize {
    let (r, c) = m.shape();
    let mut a = m.clone();
    let thresh = rel_tol * m.max_abs().max(f64::MIN_POSITIVE);
    let mut rank = 0;
    let mut rows_left: Vec<usize> = (0..r).collect();
    let mut cols_left: Vec<usize> = (0..c).collect();
    while !rows_left.is_empty() && !cols_left.is_empty() {
        let mut best = (0, 0, 0.0);
        for (ri, &i) in rows_left.iter().enumerate() {
            for (cj, &j) in cols_left.iter().enumerate() {
                if a[(i, j)].abs() > best.2 {
                    best = (ri, cj, a[(i, j)].abs());
                }
            }
        }
        if best.2 <= thresh {
            break;
        }
        let pi = rows_left.swap_remove(best.0);
        let pj = cols_left.swap_remove(best.1);
        for &i in &rows_left {
            let f = a[(i, pj)] / a[(pi, pj)];
            for &j in &cols_left {
                a[(i, j)] -= f * a[(pi, j)];
            }
        }
        rank += 1;
    }
    rank
}
