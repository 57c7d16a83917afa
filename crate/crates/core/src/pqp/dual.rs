//! Dual of a positive quadratic program by eigenvector cutting planes.

use super::primal::{find_slater_point, PrimalOptions};
use super::PqpInstance;
use crate::cutting_plane::{find_feasible, minimize_linear, AffineSymmetric, CutOptions, CutStatus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub tau: Vec<f64>,
    /// `−Σ τ_k b_k` at `tau`.
    pub value: f64,
    /// Lower bound from the cutting-plane relaxation.
    pub lower_bound: f64,
    /// `λ_max(M₀ + Σ τ_k M_k)`.
    pub lambda_max: f64,
    pub cuts: usize,
}

pub fn pqp_dual(inst: &PqpInstance) -> Result<DualSolution> {
    pqp_dual_with(inst, &CutOptions::default())
}

pub fn pqp_dual_with(inst: &PqpInstance, opts: &CutOptions) -> Result<DualSolution> {
    inst.validate()?;
    if find_slater_point(inst, &PrimalOptions::default())?.is_none() {
        return Err(Error::Hypothesis("no strictly feasible primal point; strong duality is not guaranteed".into()));
    }
    let pencil = AffineSymmetric::new(inst.objective.clone(), inst.constraints.clone())?;
    let start = find_feasible(&pencil, opts, opts.tol)?;
    match start.status {
        CutStatus::Feasible => {}
        CutStatus::Infeasible => {
            return Err(Error::Unbounded(format!(
                "no τ ≥ 0 makes M₀ + Σ τ_k M_k negative semidefinite (min λ_max ≥ {:e})",
                start.lower_bound
            )))
        }
        CutStatus::Unknown => {
            return Err(Error::NoConvergence { what: "dual feasibility search", iterations: start.cuts })
        }
    }
    let c: Vec<f64> = inst.bounds.iter().map(|b| -b).collect();
    let out = minimize_linear(&pencil, &c, &start.z, opts)?;
    if !out.converged {
        return Err(Error::NoConvergence { what: "dual cutting-plane loop", iterations: out.cuts });
    }
    if out.z.iter().any(|t| *t >= 0.99 * opts.box_bound) {
        return Err(Error::Unbounded("dual multipliers reached the search box".into()));
    }
    let tau = out.z.iter().map(|t| t.max(0.0)).collect();
    Ok(DualSolution { tau, value: out.value, lower_bound: out.lower_bound, lambda_max: out.lambda_max, cuts: out.cuts })
}
