//! Positive quadratic programming and edge-wise NSD decomposition.
//!
//! ```text
//! maximize xᵀM₀x   over x ≥ 0   subject to xᵀM_kx ≥ b_k
//! ```
//!
//! With Metzler data the problem is concave in `y = (x₁², …, xₙ²)` and
//! its value equals the SDP relaxation and the dual
//! `min −Σ τ_k b_k` subject to `M₀ + Σ τ_k M_k ⪯ 0`, `τ ≥ 0`.

mod dual;
mod nsd;
mod primal;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub use dual::{pqp_dual, pqp_dual_with, DualSolution};
pub use nsd::{nsd_decompose, NsdBlock, NsdDecomposition, NSD_TOL};
pub use primal::{find_slater_point, pqp_primal, pqp_primal_with, PrimalOptions, PrimalSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PqpInstance {
    /// `M₀`.
    pub objective: Matrix,
    /// `M₁ … M_K`.
    pub constraints: Vec<Matrix>,
    /// `b₁ … b_K`.
    pub bounds: Vec<f64>,
}

impl PqpInstance {
    pub fn new(objective: Matrix, constraints: Vec<Matrix>, bounds: Vec<f64>) -> Result<Self> {
        let inst = Self { objective, constraints, bounds };
        inst.validate()?;
        Ok(inst)
    }

    pub fn dim(&self) -> usize {
        self.objective.rows()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// All matrices square, equal size, symmetric and Metzler.
    pub fn validate(&self) -> Result<()> {
        let n = self.objective.rows();
        if self.constraints.len() != self.bounds.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} constraint matrices but {} bounds",
                self.constraints.len(),
                self.bounds.len()
            )));
        }
        if self.bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("constraint bounds".into()));
        }
        for m in std::iter::once(&self.objective).chain(&self.constraints) {
            if m.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!("expected {n}x{n}, got {}x{}", m.rows(), m.cols())));
            }
            let asym = m.asymmetry();
            if asym > 1e-9 * m.max_abs().max(1.0) {
                return Err(Error::NotSymmetric(asym));
            }
            m.require_metzler(0.0)?;
        }
        Ok(())
    }

    /// `xᵀM₀x`.
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.quad_form(x)
    }

    /// `xᵀM_kx − b_k` for every constraint.
    pub fn constraint_slacks(&self, x: &[f64]) -> Vec<f64> {
        self.constraints.iter().zip(&self.bounds).map(|(m, b)| m.quad_form(x) - b).collect()
    }
}

/// Value, gradient and Hessian of `y ↦ Σ m_ii y_i + Σ_{i≠j} m_ij √(y_i y_j)`
/// at `y > 0`.
pub(crate) fn sqrt_form(m: &Matrix, y: &[f64]) -> (f64, Vec<f64>, Matrix) {
    let n = y.len();
    let r: Vec<f64> = y.iter().map(|v| v.sqrt()).collect();
    let mut value = 0.0;
    let mut grad = vec![0.0; n];
    let mut hess = Matrix::zeros(n, n);
    for i in 0..n {
        value += m[(i, i)] * y[i];
        grad[i] += m[(i, i)];
        for j in 0..n {
            if j == i || m[(i, j)] == 0.0 {
                continue;
            }
            let mij = m[(i, j)];
            value += mij * r[i] * r[j];
            grad[i] += mij * r[j] / r[i];
            hess[(i, i)] -= 0.5 * mij * r[j] / (y[i] * r[i]);
            hess[(i, j)] += 0.5 * mij / (r[i] * r[j]);
        }
    }
    (value, grad, hess)
}

/// `Σ m_ii y_i + Σ_{i≠j} m_ij √(y_i y_j)` for `y ≥ 0`.
pub(crate) fn sqrt_form_value(m: &Matrix, y: &[f64]) -> f64 {
    let r: Vec<f64> = y.iter().map(|v| v.max(0.0).sqrt()).collect();
    m.quad_form(&r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_form_derivatives() {
        let m = Matrix::from_rows(&[[-2.0, 1.0, 0.5], [1.0, -1.0, 0.0], [0.5, 0.0, 0.3]]);
        let y = [0.7, 1.3, 0.4];
        let (v, g, h) = sqrt_form(&m, &y);
        assert!((v - sqrt_form_value(&m, &y)).abs() < 1e-14);
        let eps = 1e-6;
        for i in 0..3 {
            let mut yp = y;
            let mut ym = y;
            yp[i] += eps;
            ym[i] -= eps;
            let fd = (sqrt_form_value(&m, &yp) - sqrt_form_value(&m, &ym)) / (2.0 * eps);
            assert!((fd - g[i]).abs() < 1e-7);
            let (_, gp, _) = sqrt_form(&m, &yp);
            let (_, gm, _) = sqrt_form(&m, &ym);
            for j in 0..3 {
                let fd = (gp[j] - gm[j]) / (2.0 * eps);
                assert!((fd - h[(j, i)]).abs() < 1e-6, "h[{j},{i}]");
            }
        }
    }

    #[test]
    fn rejects_non_metzler() {
        let bad = Matrix::from_rows(&[[-1.0, -1.0], [-1.0, -1.0]]);
        assert!(PqpInstance::new(bad, vec![], vec![]).is_err());
    }
}
