//! Dense two-phase simplex.
//!
//! Problems have the form `min cᵀy  s.t.  M y ≤ b` (some rows may be
//! equalities), with a per-variable nonnegativity mask. Strict rows are
//! handled either by maximizing a uniform slack
//! ([`LinearProgram::feasibility_with_margin`]) or by tightening them by a
//! fixed amount before optimizing ([`LinearProgram::solve_tightened`]).
//! Pivoting follows Bland's rule throughout, so results are deterministic.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Smallest accepted margin on strict rows.
pub const MIN_MARGIN: f64 = 1e-9;
/// Upper cap on the margin variable so the margin LP stays bounded.
pub const MARGIN_CAP: f64 = 1.0;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Solution (empty unless optimal).
    pub y: Vec<f64>,
    pub objective: f64,
    /// Smallest slack over strict rows at `y`; `+∞` without strict rows.
    pub margin: f64,
}

impl LpOutcome {
    fn non_optimal(status: LpStatus) -> Self {
        Self { status, y: Vec::new(), objective: f64::NAN, margin: f64::NAN }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// `min cᵀy` subject to `M y ≤ b` (or `=` on equality rows).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Matrix,
    pub rhs: Vec<f64>,
    pub nonneg: Vec<bool>,
    /// Rows whose inequality is meant strictly.
    pub strict_rows: Vec<usize>,
    /// Rows that are equalities.
    pub eq_rows: Vec<usize>,
}

impl LinearProgram {
    /// Empty program over `n` nonnegative variables with zero objective.
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![0.0; n],
            constraints: Matrix::zeros(0, n),
            rhs: Vec::new(),
            nonneg: vec![true; n],
            strict_rows: Vec::new(),
            eq_rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn set_free(&mut self, var: usize) {
        self.nonneg[var] = false;
    }

    fn push_row(&mut self, coeffs: &[f64], rhs: f64) -> usize {
        assert_eq!(coeffs.len(), self.num_vars(), "row length must equal variable count");
        let row = Matrix::row_vector(coeffs);
        self.constraints = self.constraints.vstack(&row).expect("width checked above");
        self.rhs.push(rhs);
        self.rhs.len() - 1
    }

    /// Adds `coeffsᵀ y ≤ rhs`.
    pub fn add_le(&mut self, coeffs: &[f64], rhs: f64) -> usize {
        self.push_row(coeffs, rhs)
    }

    /// Adds `coeffsᵀ y < rhs`.
    pub fn add_lt(&mut self, coeffs: &[f64], rhs: f64) -> usize {
        let r = self.push_row(coeffs, rhs);
        self.strict_rows.push(r);
        r
    }

    /// Adds `coeffsᵀ y ≥ rhs`.
    pub fn add_ge(&mut self, coeffs: &[f64], rhs: f64) -> usize {
        let neg: Vec<f64> = coeffs.iter().map(|v| -v).collect();
        self.push_row(&neg, -rhs)
    }

    /// Adds `coeffsᵀ y > rhs`.
    pub fn add_gt(&mut self, coeffs: &[f64], rhs: f64) -> usize {
        let neg: Vec<f64> = coeffs.iter().map(|v| -v).collect();
        self.add_lt(&neg, -rhs)
    }

    /// Adds `coeffsᵀ y = rhs`.
    pub fn add_eq(&mut self, coeffs: &[f64], rhs: f64) -> usize {
        let r = self.push_row(coeffs, rhs);
        self.eq_rows.push(r);
        r
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.constraints.cols() != n || self.nonneg.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} variables but constraint matrix has {} columns and mask has {} entries",
                n,
                self.constraints.cols(),
                self.nonneg.len()
            )));
        }
        if self.constraints.rows() != self.rhs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} constraint rows but {} right-hand sides",
                self.constraints.rows(),
                self.rhs.len()
            )));
        }
        let m = self.rhs.len();
        if let Some(&r) = self.strict_rows.iter().chain(&self.eq_rows).find(|&&r| r >= m) {
            return Err(Error::DimensionMismatch(format!("row index {r} out of range ({m} rows)")));
        }
        if self.eq_rows.iter().any(|r| self.strict_rows.contains(r)) {
            return Err(Error::InvalidArgument("a row cannot be both strict and an equality".into()));
        }
        if !self.objective.iter().chain(&self.rhs).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("linear program data".into()));
        }
        Ok(())
    }

    /// Slack `b - M y` per row.
    pub fn slacks(&self, y: &[f64]) -> Vec<f64> {
        let my = self.constraints.mul_vec(y);
        self.rhs.iter().zip(my).map(|(b, v)| b - v).collect()
    }

    /// Smallest slack over strict rows (`+∞` if there are none).
    pub fn strict_margin(&self, y: &[f64]) -> f64 {
        let s = self.slacks(y);
        self.strict_rows.iter().map(|&r| s[r]).fold(f64::INFINITY, f64::min)
    }

    /// Largest violation of any row or sign constraint at `y`.
    pub fn max_violation(&self, y: &[f64]) -> f64 {
        let s = self.slacks(y);
        let mut worst = 0.0_f64;
        for (r, v) in s.iter().enumerate() {
            let viol = if self.eq_rows.contains(&r) { v.abs() } else { -v };
            worst = worst.max(viol);
        }
        for (j, &nn) in self.nonneg.iter().enumerate() {
            if nn {
                worst = worst.max(-y[j]);
            }
        }
        worst
    }

    /// Optimizes, treating strict rows as non-strict.
    pub fn solve(&self) -> Result<LpOutcome> {
        self.validate()?;
        let mut out = simplex(self)?;
        if out.is_optimal() {
            out.margin = self.strict_margin(&out.y);
        }
        Ok(out)
    }

    /// Optimizes with every strict row tightened by `delta`.
    pub fn solve_tightened(&self, delta: f64) -> Result<LpOutcome> {
        self.validate()?;
        let mut tight = self.clone();
        for &r in &self.strict_rows {
            tight.rhs[r] -= delta;
        }
        let mut out = simplex(&tight)?;
        if out.is_optimal() {
            out.margin = self.strict_margin(&out.y);
        }
        Ok(out)
    }

    /// Maximizes a uniform slack `ε ≤ 1` on the strict rows, ignoring the
    /// objective. Reports `Optimal` iff the best `ε` exceeds [`MIN_MARGIN`].
    pub fn feasibility_with_margin(&self) -> Result<LpOutcome> {
        self.validate()?;
        let n = self.num_vars();
        let m = self.num_rows();
        let mut aug = LinearProgram::new(n + 1);
        aug.nonneg = self.nonneg.clone();
        aug.nonneg.push(false);
        aug.objective[n] = -1.0;
        let mut rows = Vec::with_capacity((m + 1) * (n + 1));
        for r in 0..m {
            rows.extend_from_slice(self.constraints.row(r));
            rows.push(if self.strict_rows.contains(&r) { 1.0 } else { 0.0 });
        }
        let mut cap = vec![0.0; n + 1];
        cap[n] = 1.0;
        rows.extend_from_slice(&cap);
        aug.constraints = Matrix::new(m + 1, n + 1, rows)?;
        aug.rhs = self.rhs.clone();
        aug.rhs.push(MARGIN_CAP);
        aug.eq_rows = self.eq_rows.clone();

        let out = simplex(&aug)?;
        match out.status {
            LpStatus::Optimal => {
                let eps = out.y[n];
                let y = out.y[..n].to_vec();
                let margin = self.strict_margin(&y).min(if self.strict_rows.is_empty() { f64::INFINITY } else { eps });
                if self.strict_rows.is_empty() || eps > MIN_MARGIN {
                    let objective = dot(&self.objective, &y);
                    Ok(LpOutcome { status: LpStatus::Optimal, y, objective, margin })
                } else {
                    Ok(LpOutcome { status: LpStatus::Infeasible, y, objective: f64::NAN, margin: eps })
                }
            }
            // ε is capped, so unboundedness cannot come from the margin.
            s => Ok(LpOutcome::non_optimal(s)),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Column layout of the standard-form tableau.
struct Layout {
    /// For each original variable: (positive column, optional negative column).
    split: Vec<(usize, Option<usize>)>,
    n_total: usize,
    first_artificial: usize,
}

struct Tableau {
    rows: usize,
    width: usize, // columns incl. rhs
    a: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn pivot(&mut self, pr: usize, pc: usize, cost: &mut [f64]) {
        let w = self.width;
        let p = self.a[pr * w + pc];
        for j in 0..w {
            self.a[pr * w + j] /= p;
        }
        self.a[pr * w + pc] = 1.0;
        let prow: Vec<f64> = self.a[pr * w..(pr + 1) * w].to_vec();
        let nz: Vec<usize> = (0..w).filter(|&j| prow[j] != 0.0).collect();
        for i in 0..self.rows {
            if i == pr {
                continue;
            }
            let f = self.a[i * w + pc];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * w..(i + 1) * w];
            for &j in &nz {
                row[j] -= f * prow[j];
            }
            row[pc] = 0.0;
        }
        let f = cost[pc];
        if f != 0.0 {
            for &j in &nz {
                cost[j] -= f * prow[j];
            }
            cost[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Runs Bland's rule on columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, cost: &mut [f64], allowed: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let Some(pc) = (0..allowed).find(|&j| cost[j] < -COST_TOL) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let aij = self.at(i, pc);
                if aij > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / aij;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * br.abs().max(1.0);
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Ok(false),
                Some((pr, _)) => self.pivot(pr, pc, cost),
            }
        }
        Err(Error::NoConvergence { what: "simplex", iterations: MAX_PIVOTS })
    }
}

fn simplex(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.num_vars();
    let m = lp.num_rows();

    let mut split = Vec::with_capacity(n);
    let mut col = 0;
    for &nn in &lp.nonneg {
        if nn {
            split.push((col, None));
            col += 1;
        } else {
            split.push((col, Some(col + 1)));
            col += 2;
        }
    }
    let n_struct = col;
    let is_eq: Vec<bool> = (0..m).map(|r| lp.eq_rows.contains(&r)).collect();
    let n_slack = is_eq.iter().filter(|e| !**e).count();
    let needs_art: Vec<bool> = (0..m).map(|r| is_eq[r] || lp.rhs[r] < 0.0).collect();
    let n_art = needs_art.iter().filter(|x| **x).count();
    let first_artificial = n_struct + n_slack;
    let layout = Layout { split, n_total: first_artificial + n_art, first_artificial };

    let width = layout.n_total + 1;
    let mut t = Tableau { rows: m, width, a: vec![0.0; m * width], basis: vec![0; m] };
    let mut slack_col = n_struct;
    let mut art_col = first_artificial;
    for r in 0..m {
        let sign = if lp.rhs[r] < 0.0 { -1.0 } else { 1.0 };
        let src = lp.constraints.row(r);
        for (v, &(pos, neg)) in layout.split.iter().enumerate() {
            t.a[r * width + pos] = sign * src[v];
            if let Some(nc) = neg {
                t.a[r * width + nc] = -sign * src[v];
            }
        }
        if !is_eq[r] {
            t.a[r * width + slack_col] = sign;
            if !needs_art[r] {
                t.basis[r] = slack_col;
            }
            slack_col += 1;
        }
        if needs_art[r] {
            t.a[r * width + art_col] = 1.0;
            t.basis[r] = art_col;
            art_col += 1;
        }
        t.a[r * width + width - 1] = sign * lp.rhs[r];
    }

    let scale = lp.rhs.iter().fold(1.0_f64, |s, v| s.max(v.abs()));

    if n_art > 0 {
        let mut cost = vec![0.0; width];
        for r in 0..m {
            if needs_art[r] {
                for j in 0..width {
                    cost[j] -= t.at(r, j);
                }
            }
        }
        for j in first_artificial..layout.n_total {
            cost[j] = 0.0;
        }
        t.optimize(&mut cost, layout.n_total)?;
        let infeas: f64 = (0..m)
            .filter(|&r| t.basis[r] >= first_artificial)
            .map(|r| t.rhs(r))
            .sum();
        if infeas > 1e-9 * scale {
            return Ok(LpOutcome::non_optimal(LpStatus::Infeasible));
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if t.basis[r] >= first_artificial {
                if let Some(j) = (0..first_artificial).find(|&j| t.at(r, j).abs() > 1e-9) {
                    let mut dummy = vec![0.0; width];
                    t.pivot(r, j, &mut dummy);
                } else {
                    // redundant row; keep it inert
                    for j in 0..first_artificial {
                        t.a[r * width + j] = 0.0;
                    }
                }
            }
        }
    }

    let mut cost = vec![0.0; width];
    for (v, &(pos, neg)) in layout.split.iter().enumerate() {
        cost[pos] = lp.objective[v];
        if let Some(nc) = neg {
            cost[nc] = -lp.objective[v];
        }
    }
    for r in 0..m {
        let b = t.basis[r];
        let cb = if b < layout.n_total { cost[b] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..width {
                cost[j] -= cb * t.at(r, j);
            }
        }
    }
    if !t.optimize(&mut cost, layout.first_artificial)? {
        return Ok(LpOutcome::non_optimal(LpStatus::Unbounded));
    }

    let mut x = vec![0.0; layout.n_total];
    for r in 0..m {
        x[t.basis[r]] = t.rhs(r);
    }
    let y: Vec<f64> = layout
        .split
        .iter()
        .map(|&(pos, neg)| x[pos] - neg.map_or(0.0, |c| x[c]))
        .collect();
    let objective = dot(&lp.objective, &y);
    Ok(LpOutcome { status: LpStatus::Optimal, y, objective, margin: f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_maximum() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![-1.0];
        lp.add_le(&[1.0], 1.0);
        let out = lp.solve().unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.y[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_sign() {
        let mut lp = LinearProgram::new(1);
        lp.add_le(&[1.0], -1.0);
        assert_eq!(lp.solve().unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-1.0, 0.0];
        lp.add_le(&[1.0, -1.0], 1.0);
        assert_eq!(lp.solve().unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x + y  s.t. x - y = 3, x ≥ -5 (x, y free)
        let mut lp = LinearProgram::new(2);
        lp.set_free(0);
        lp.set_free(1);
        lp.objective = vec![1.0, 1.0];
        lp.add_eq(&[1.0, -1.0], 3.0);
        lp.add_ge(&[1.0, 0.0], -5.0);
        let out = lp.solve().unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.y[0] + 5.0).abs() < 1e-12 && (out.y[1] + 8.0).abs() < 1e-12);
    }

    #[test]
    fn margin_for_stable_matrix() {
        // -ξ < 0 with ξ ≤ 2
        let mut lp = LinearProgram::new(2);
        lp.add_lt(&[-1.0, 0.0], 0.0);
        lp.add_lt(&[0.0, -1.0], 0.0);
        lp.add_le(&[1.0, 0.0], 2.0);
        lp.add_le(&[0.0, 1.0], 2.0);
        let out = lp.feasibility_with_margin().unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.margin - 1.0).abs() < 1e-12);
        assert!(out.y.iter().all(|&v| v >= 1.0 - 1e-12));
    }

    #[test]
    fn margin_for_unstable_matrix() {
        // [[0,1],[1,0]] ξ < 0 has no positive solution
        let mut lp = LinearProgram::new(2);
        lp.add_lt(&[0.0, 1.0], 0.0);
        lp.add_lt(&[1.0, 0.0], 0.0);
        lp.add_le(&[1.0, 0.0], 2.0);
        lp.add_le(&[0.0, 1.0], 2.0);
        let out = lp.feasibility_with_margin().unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
        assert!(out.margin <= MIN_MARGIN);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook rule; Bland terminates.
        let mut lp = LinearProgram::new(4);
        lp.objective = vec![-0.75, 150.0, -0.02, 6.0];
        lp.add_le(&[0.25, -60.0, -0.04, 9.0], 0.0);
        lp.add_le(&[0.5, -90.0, -0.02, 3.0], 0.0);
        lp.add_le(&[0.0, 0.0, 1.0, 0.0], 1.0);
        let out = lp.solve().unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective + 0.05).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_dimensions() {
        let mut lp = LinearProgram::new(2);
        lp.rhs.push(1.0);
        assert!(matches!(lp.solve(), Err(Error::DimensionMismatch(_))));
    }
}
