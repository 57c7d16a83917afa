//! Eigenvector cutting planes for constraints `S(z) = S₀ + Σ z_k S_k ⪯ 0`
//! over `z ≥ 0`.
//!
//! Every unit vector `v` gives the valid linear cut `vᵀS(z)v ≤ 0`; the top
//! eigenvector at an infeasible point gives the deepest one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::lp::{LinearProgram, LpStatus};

/// Affine symmetric matrix function `z ↦ S₀ + Σ z_k S_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSymmetric {
    base: Matrix,
    terms: Vec<Matrix>,
}

impl AffineSymmetric {
    pub fn new(base: Matrix, terms: Vec<Matrix>) -> Result<Self> {
        base.require_square()?;
        let n = base.rows();
        for t in &terms {
            if t.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "pencil term is {}x{}, base is {n}x{n}",
                    t.rows(),
                    t.cols()
                )));
            }
        }
        for m in std::iter::once(&base).chain(&terms) {
            let asym = m.asymmetry();
            if asym > 1e-9 * m.max_abs().max(1.0) {
                return Err(Error::NotSymmetric(asym));
            }
        }
        Ok(Self { base: base.symmetrize(), terms: terms.iter().map(Matrix::symmetrize).collect() })
    }

    pub fn dim(&self) -> usize {
        self.base.rows()
    }

    pub fn num_vars(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, z: &[f64]) -> Matrix {
        let mut s = self.base.clone();
        for (t, &zk) in self.terms.iter().zip(z) {
            if zk != 0.0 {
                s = &s + &t.scale(zk);
            }
        }
        s
    }

    /// Largest eigenvalue of `S(z)` and a unit eigenvector.
    pub fn top(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        let eig = symmetric_eigen(&self.eval(z))?;
        let k = eig.values.len() - 1;
        Ok((eig.values[k], eig.vector(k)))
    }

    /// `(vᵀS₀v, [vᵀS_kv]_k)`.
    pub fn cut(&self, v: &[f64]) -> (f64, Vec<f64>) {
        (self.base.quad_form(v), self.terms.iter().map(|t| t.quad_form(v)).collect())
    }

    /// Linear equalities forced by diagonal entries that vanish for every
    /// `z`: a zero diagonal in an NSD matrix forces its row to zero.
    /// Rows are `(coefficients, rhs)` with `coefficients·z = rhs`.
    pub fn face_equalities(&self) -> Vec<(Vec<f64>, f64)> {
        let n = self.dim();
        let mut rows = Vec::new();
        for i in 0..n {
            let dead = self.base[(i, i)] == 0.0 && self.terms.iter().all(|t| t[(i, i)] == 0.0);
            if !dead {
                continue;
            }
            for j in 0..n {
                if j == i {
                    continue;
                }
                let coeffs: Vec<f64> = self.terms.iter().map(|t| t[(i, j)]).collect();
                let rhs = -self.base[(i, j)];
                if rhs != 0.0 || coeffs.iter().any(|c| *c != 0.0) {
                    rows.push((coeffs, rhs));
                }
            }
        }
        rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutOptions {
    /// Every `z_k` is confined to `[0, box_bound]`.
    pub box_bound: f64,
    /// Accept `λ_max(S(z)) ≤ tol` as feasible.
    pub tol: f64,
    pub max_cuts: usize,
    /// Relative optimality gap for [`minimize_linear`].
    pub rel_gap: f64,
}

impl Default for CutOptions {
    fn default() -> Self {
        Self { box_bound: 1e6, tol: 1e-8, max_cuts: 5000, rel_gap: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutStatus {
    Feasible,
    Infeasible,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityOutcome {
    pub status: CutStatus,
    /// Point with the smallest `λ_max` seen.
    pub z: Vec<f64>,
    pub lambda_max: f64,
    /// Lower bound on `min λ_max(S(z))` over the box.
    pub lower_bound: f64,
    pub cuts: usize,
}

/// Cutting-plane LP over `z ∈ [0, box]ⁿ`, plus an optional free epigraph
/// variable in the last slot.
struct CutLp {
    lp: LinearProgram,
    nz: usize,
}

impl CutLp {
    fn new(pencil: &AffineSymmetric, opts: &CutOptions, epigraph: bool) -> Self {
        let nz = pencil.num_vars();
        let nv = nz + usize::from(epigraph);
        let mut lp = LinearProgram::new(nv);
        if epigraph {
            lp.set_free(nz);
        }
        for k in 0..nz {
            let mut row = vec![0.0; nv];
            row[k] = 1.0;
            lp.add_le(&row, opts.box_bound);
        }
        for (coeffs, rhs) in pencil.face_equalities() {
            let mut row = vec![0.0; nv];
            row[..nz].copy_from_slice(&coeffs);
            lp.add_eq(&row, rhs);
        }
        Self { lp, nz }
    }

    /// `vᵀS(z)v ≤ s` (epigraph) or `≤ 0`.
    fn add_cut(&mut self, pencil: &AffineSymmetric, v: &[f64]) {
        let (c0, coeffs) = pencil.cut(v);
        let mut row = vec![0.0; self.lp.num_vars()];
        row[..self.nz].copy_from_slice(&coeffs);
        if self.lp.num_vars() > self.nz {
            row[self.nz] = -1.0;
        }
        self.lp.add_le(&row, -c0);
    }
}

/// Searches `z ∈ [0, box]ⁿ` with `λ_max(S(z)) ≤ target` by minimizing
/// `λ_max` with Kelley cuts.
pub fn find_feasible(pencil: &AffineSymmetric, opts: &CutOptions, target: f64) -> Result<FeasibilityOutcome> {
    let nz = pencil.num_vars();
    let mut cl = CutLp::new(pencil, opts, true);
    cl.lp.objective[nz] = 1.0;

    let mut z = vec![0.0; nz];
    let (mut lam, mut v) = pencil.top(&z)?;
    let mut best = FeasibilityOutcome {
        status: CutStatus::Unknown,
        z: z.clone(),
        lambda_max: lam,
        lower_bound: f64::NEG_INFINITY,
        cuts: 0,
    };
    let faces = !pencil.face_equalities().is_empty();
    if lam <= target && !faces {
        best.status = CutStatus::Feasible;
        return Ok(best);
    }
    for cuts in 1..=opts.max_cuts {
        cl.add_cut(pencil, &v);
        let out = cl.lp.solve()?;
        best.cuts = cuts;
        match out.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                best.status = CutStatus::Infeasible;
                best.lower_bound = f64::INFINITY;
                return Ok(best);
            }
            LpStatus::Unbounded => {
                return Err(Error::Unbounded("cutting-plane epigraph LP".into()));
            }
        }
        z = out.y[..nz].to_vec();
        best.lower_bound = best.lower_bound.max(out.y[nz]);
        (lam, v) = pencil.top(&z)?;
        if lam < best.lambda_max {
            best.lambda_max = lam;
            best.z = z.clone();
        }
        if best.lambda_max <= target {
            best.status = CutStatus::Feasible;
            return Ok(best);
        }
        if best.lower_bound > target {
            best.status = CutStatus::Infeasible;
            return Ok(best);
        }
        if best.lambda_max - best.lower_bound <= 1e-12 * best.lambda_max.abs().max(1.0) {
            // Converged to a minimum above the target.
            best.status = CutStatus::Infeasible;
            return Ok(best);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearOutcome {
    /// Best point found with `λ_max ≤ tol`.
    pub z: Vec<f64>,
    /// `cᵀz` at that point: an upper bound on the optimum.
    pub value: f64,
    /// Lower bound from the cut LP.
    pub lower_bound: f64,
    pub lambda_max: f64,
    pub cuts: usize,
    pub converged: bool,
}

/// Minimizes `cᵀz` over `{z ∈ [0, box]ⁿ : λ_max(S(z)) ≤ tol}` starting
/// from a feasible `start`. Each round adds a cut at the LP optimum and
/// another where the segment towards the best feasible point leaves the
/// feasible set.
pub fn minimize_linear(pencil: &AffineSymmetric, c: &[f64], start: &[f64], opts: &CutOptions) -> Result<LinearOutcome> {
    let nz = pencil.num_vars();
    if c.len() != nz || start.len() != nz {
        return Err(Error::DimensionMismatch("objective or start point length".into()));
    }
    let (lam0, v0) = pencil.top(start)?;
    if lam0 > opts.tol {
        return Err(Error::InvalidArgument(format!("start point is infeasible (λ_max = {lam0:e})")));
    }
    let dot = |z: &[f64]| c.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
    let mut cl = CutLp::new(pencil, opts, false);
    cl.lp.objective = c.to_vec();
    cl.add_cut(pencil, &v0);

    let mut best = LinearOutcome {
        z: start.to_vec(),
        value: dot(start),
        lower_bound: f64::NEG_INFINITY,
        lambda_max: lam0,
        cuts: 1,
        converged: false,
    };
    while best.cuts < opts.max_cuts {
        let out = cl.lp.solve()?;
        match out.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::Infeasible("cutting-plane LP lost the start point".into())),
            LpStatus::Unbounded => return Err(Error::Unbounded("cutting-plane LP".into())),
        }
        let z = out.y.clone();
        best.lower_bound = best.lower_bound.max(dot(&z));
        let (lam, v) = pencil.top(&z)?;
        if lam <= opts.tol {
            if dot(&z) < best.value {
                best.z = z;
                best.value = dot(&best.z);
                best.lambda_max = lam;
            }
        } else {
            cl.add_cut(pencil, &v);
            best.cuts += 1;
            let edge = boundary_point(pencil, &best.z, &z, opts.tol)?;
            let (elam, ev) = pencil.top(&edge)?;
            if elam <= opts.tol && dot(&edge) < best.value {
                best.value = dot(&edge);
                best.z = edge;
                best.lambda_max = elam;
            }
            if elam > -opts.tol {
                cl.add_cut(pencil, &ev);
                best.cuts += 1;
            }
        }
        if best.value - best.lower_bound <= opts.rel_gap * best.value.abs().max(1.0) {
            best.converged = true;
            break;
        }
    }
    Ok(best)
}

/// Last feasible point on the segment from `inside` to `outside`.
fn boundary_point(pencil: &AffineSymmetric, inside: &[f64], outside: &[f64], tol: f64) -> Result<Vec<f64>> {
    let at = |theta: f64| -> Vec<f64> { inside.iter().zip(outside).map(|(a, b)| a + theta * (b - a)).collect() };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if pencil.top(&at(mid))?.0 <= tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(at(lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_minimum() {
        // 1 − τ ≤ 0, minimize τ → τ = 1
        let pencil = AffineSymmetric::new(Matrix::from_rows(&[[1.0]]), vec![Matrix::from_rows(&[[-1.0]])]).unwrap();
        let start = find_feasible(&pencil, &CutOptions::default(), 0.0).unwrap();
        assert_eq!(start.status, CutStatus::Feasible);
        let r = minimize_linear(&pencil, &[1.0], &start.z, &CutOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zero_diagonal_face() {
        // [[−2p, 1], [1, 0]] is never NSD.
        let pencil = AffineSymmetric::new(
            Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]),
            vec![Matrix::from_rows(&[[-2.0, 0.0], [0.0, 0.0]])],
        )
        .unwrap();
        let out = find_feasible(&pencil, &CutOptions::default(), 1e-8).unwrap();
        assert_eq!(out.status, CutStatus::Infeasible);
    }

    #[test]
    fn two_variable_lmi() {
        // [[1 − a, 0.5], [0.5, 1 − b]] ⪯ 0, minimize a + b
        let pencil = AffineSymmetric::new(
            Matrix::from_rows(&[[1.0, 0.5], [0.5, 1.0]]),
            vec![Matrix::from_rows(&[[-1.0, 0.0], [0.0, 0.0]]), Matrix::from_rows(&[[0.0, 0.0], [0.0, -1.0]])],
        )
        .unwrap();
        let start = find_feasible(&pencil, &CutOptions::default(), 0.0).unwrap();
        assert_eq!(start.status, CutStatus::Feasible);
        let opts = CutOptions { rel_gap: 1e-9, ..CutOptions::default() };
        let r = minimize_linear(&pencil, &[1.0, 1.0], &start.z, &opts).unwrap();
        // (a−1)(b−1) ≥ 0.25 with a = b → a = 1.5, value 3
        assert!(r.converged, "{r:?}");
        assert!((r.value - 3.0).abs() < 1e-7, "{}", r.value);
    }
}
