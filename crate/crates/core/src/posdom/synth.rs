//! Gain synthesis for interconnections of positively dominated blocks.
//!
//! ```text
//! x = 𝐀x + 𝐁w + 𝐄u      z = 𝐂x + 𝐃w      u = L𝐅x
//! ```
//!
//! Everything reduces to static gains, so the program is an LP over
//! `(p, q, γ)` with `q = L·𝐄(0)ᵀp`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rational::{RationalFunction, RationalTransferMatrix, TfStability};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Matrix};
use crate::lp::{LinearProgram, LpStatus};
use crate::performance::{gain_norm, Direction, NormKind, PerformanceCertificate};
use crate::synthesis::{recover_gains, CheckReport, SynthesisResult, STRICT_TIGHTENING};

/// Entries of `𝐀 + 𝐄L𝐅` with more active gains than this are refused.
pub const MAX_VERTEX_GAINS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominatedProblem {
    pub a: RationalTransferMatrix,
    pub b: RationalTransferMatrix,
    pub c: RationalTransferMatrix,
    pub d: RationalTransferMatrix,
    pub e: RationalTransferMatrix,
    pub f: RationalTransferMatrix,
    pub bounds: Vec<f64>,
}

/// Static gains `X(0)` of every block.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticData {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    pub e: Matrix,
    pub f: Matrix,
}

impl DominatedProblem {
    pub fn new(
        a: RationalTransferMatrix,
        b: RationalTransferMatrix,
        c: RationalTransferMatrix,
        d: RationalTransferMatrix,
        e: RationalTransferMatrix,
        f: RationalTransferMatrix,
    ) -> Result<Self> {
        let bounds = vec![1.0; e.cols()];
        let prob = Self { a, b, c, d, e, f, bounds };
        prob.check_dimensions()?;
        Ok(prob)
    }

    pub fn states(&self) -> usize {
        self.a.rows()
    }

    pub fn num_gains(&self) -> usize {
        self.e.cols()
    }

    pub fn check_dimensions(&self) -> Result<()> {
        let n = self.a.rows();
        let m = self.e.cols();
        let k = self.b.cols();
        let l = self.c.rows();
        let ok = self.a.cols() == n
            && self.b.rows() == n
            && self.c.cols() == n
            && self.d.shape() == (l, k)
            && self.e.rows() == n
            && self.f.shape() == (m, n)
            && self.bounds.len() == m;
        if !ok {
            return Err(Error::DimensionMismatch("blocks of the dominated interconnection do not conform".into()));
        }
        if let Some(b) = self.bounds.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
            return Err(Error::InvalidArgument(format!("gain bound {b} must be finite and nonnegative")));
        }
        Ok(())
    }

    pub fn static_data(&self) -> Result<StaticData> {
        Ok(StaticData {
            a: self.a.dc_gain()?,
            b: self.b.dc_gain()?,
            c: self.c.dc_gain()?,
            d: self.d.dc_gain()?,
            e: self.e.dc_gain()?,
            f: self.f.dc_gain()?,
        })
    }

    /// `𝐀 + 𝐄L𝐅` as a rational matrix.
    pub fn loop_matrix(&self, gains: &[f64]) -> Result<RationalTransferMatrix> {
        self.check_gain_count(gains)?;
        let n = self.states();
        Ok(RationalTransferMatrix::from_fn(n, n, |i, j| {
            (0..gains.len()).fold(self.a.get(i, j).clone(), |acc, k| {
                if gains[k] == 0.0 {
                    acc
                } else {
                    acc.add(&self.e.get(i, k).mul(self.f.get(k, j)).scale(gains[k]))
                }
            })
        }))
    }

    /// `𝐂(iω)(I − 𝐀(iω) − 𝐄(iω)L𝐅(iω))⁻¹𝐁(iω) + 𝐃(iω)`.
    pub fn closed_loop_response(&self, gains: &[f64], omega: f64) -> Result<CMatrix> {
        self.check_gain_count(gains)?;
        let s = Complex64::new(0.0, omega);
        let n = self.states();
        let mut lf = self.f.eval(s);
        for k in 0..gains.len() {
            for j in 0..n {
                lf.set(k, j, lf.get(k, j) * gains[k]);
            }
        }
        let m = self.a.eval(s).add_scaled(Complex64::new(1.0, 0.0), &self.e.eval(s).mul(&lf)?)?;
        let resolvent = CMatrix::identity(n).add_scaled(Complex64::new(-1.0, 0.0), &m)?;
        let x = resolvent.solve(&self.b.eval(s))?;
        self.c.eval(s).mul(&x)?.add_scaled(Complex64::new(1.0, 0.0), &self.d.eval(s))
    }

    fn check_gain_count(&self, gains: &[f64]) -> Result<()> {
        if gains.len() != self.num_gains() {
            return Err(Error::DimensionMismatch(format!("{} gains for {} channels", gains.len(), self.num_gains())));
        }
        Ok(())
    }
}

fn dominance_check(report: &mut CheckReport, name: &str, g: &RationalTransferMatrix) -> Result<()> {
    for (i, j, f) in g.entries() {
        match f.dominance_witness() {
            Ok(None) => {}
            Ok(Some(w)) => {
                report.push(name, false, format!("entry ({i},{j}) exceeds its static gain at ω = {w}"));
                return Ok(());
            }
            Err(Error::Unstable(msg)) => {
                report.push(name, false, format!("entry ({i},{j}): {msg}"));
                return Ok(());
            }
            Err(e) => return Err(e),
        }
    }
    report.push(name, true, "");
    Ok(())
}

/// Checks that `𝐁, 𝐂, 𝐃, 𝐄` are dominated, `𝐅` is stable, and every
/// entry of `𝐀 + 𝐄L𝐅` is dominated at all vertices of the gain box.
/// Dominated functions form a convex cone and each entry is affine in
/// `L`, so the vertex test covers the whole box.
pub fn check_hypotheses(prob: &DominatedProblem) -> Result<CheckReport> {
    prob.check_dimensions()?;
    let mut report = CheckReport::default();
    dominance_check(&mut report, "B dominated", &prob.b)?;
    dominance_check(&mut report, "C dominated", &prob.c)?;
    dominance_check(&mut report, "D dominated", &prob.d)?;
    dominance_check(&mut report, "E dominated", &prob.e)?;
    let f_stable = prob.f.entries().all(|(_, _, f)| f.stability() == TfStability::Stable);
    report.push("F stable", f_stable, "");

    let n = prob.states();
    let m = prob.num_gains();
    let mut worst: Option<String> = None;
    'entries: for i in 0..n {
        for j in 0..n {
            let terms: Vec<(usize, RationalFunction)> = (0..m)
                .filter(|&k| prob.bounds[k] > 0.0)
                .map(|k| (k, prob.e.get(i, k).mul(prob.f.get(k, j))))
                .filter(|(_, t)| !t.is_zero())
                .collect();
            if terms.len() > MAX_VERTEX_GAINS {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i},{j}) of A + ELF depends on {} gains; at most {MAX_VERTEX_GAINS} are supported",
                    terms.len()
                )));
            }
            for mask in 0u32..(1u32 << terms.len()) {
                let entry = terms.iter().enumerate().fold(prob.a.get(i, j).clone(), |acc, (bit, (k, t))| {
                    if mask & (1 << bit) != 0 {
                        acc.add(&t.scale(prob.bounds[*k]))
                    } else {
                        acc
                    }
                });
                let verdict = match entry.dominance_witness() {
                    Ok(w) => w.map(|w| format!("exceeds static gain at ω = {w}")),
                    Err(Error::Unstable(msg)) => Some(msg),
                    Err(e) => return Err(e),
                };
                if let Some(why) = verdict {
                    let active: Vec<usize> =
                        terms.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, t)| t.0).collect();
                    worst = Some(format!("entry ({i},{j}) with gains {active:?} at their bounds: {why}"));
                    break 'entries;
                }
            }
        }
    }
    let pass = worst.is_none();
    report.push("A + ELF dominated on the gain box", pass, worst.unwrap_or_default());
    Ok(report)
}

/// Minimizes the 1-induced closed-loop gain over `L` in the gain box.
pub fn synthesize_dominated(prob: &DominatedProblem) -> Result<Option<SynthesisResult>> {
    let report = check_hypotheses(prob)?;
    if !report.pass() {
        let msgs: Vec<String> = report.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        return Err(Error::Hypothesis(msgs.join("; ")));
    }
    let data = prob.static_data()?;
    for delta in [STRICT_TIGHTENING, 1e3 * STRICT_TIGHTENING] {
        let Some(result) = solve_static(prob, &data, delta)? else { return Ok(None) };
        if static_slack(&data, &result)? > 0.0 {
            return Ok(Some(result));
        }
    }
    Err(Error::Infeasible("recovered gains fail re-verification".into()))
}

fn solve_static(prob: &DominatedProblem, data: &StaticData, delta: f64) -> Result<Option<SynthesisResult>> {
    let n = prob.states();
    let m = prob.num_gains();
    let k = data.b.cols();
    let l = data.c.rows();
    let nv = n + m + 1;
    let gamma_var = n + m;
    let mut lp = LinearProgram::new(nv);

    // (A0ᵀ − I)p + F0ᵀq < −C0ᵀ𝟏
    for i in 0..n {
        let mut row = vec![0.0; nv];
        for r in 0..n {
            row[r] = data.a[(r, i)];
        }
        row[i] -= 1.0;
        for kk in 0..m {
            row[n + kk] = data.f[(kk, i)];
        }
        let c1: f64 = (0..l).map(|r| data.c[(r, i)]).sum();
        lp.add_lt(&row, -c1);
    }
    // B0ᵀp − γ𝟏 < −D0ᵀ𝟏
    for j in 0..k {
        let mut row = vec![0.0; nv];
        for r in 0..n {
            row[r] = data.b[(r, j)];
        }
        row[gamma_var] = -1.0;
        let d1: f64 = (0..l).map(|r| data.d[(r, j)]).sum();
        lp.add_lt(&row, -d1);
    }
    // q ≤ bound ∘ E0ᵀp
    for kk in 0..m {
        let mut row = vec![0.0; nv];
        for r in 0..n {
            row[r] = -prob.bounds[kk] * data.e[(r, kk)];
        }
        row[n + kk] = 1.0;
        lp.add_le(&row, 0.0);
    }
    lp.objective[gamma_var] = 1.0;
    let out = lp.solve_tightened(delta)?;
    if out.status != LpStatus::Optimal {
        return Ok(None);
    }
    let p = out.y[..n].to_vec();
    let q = out.y[n..n + m].to_vec();
    let gamma = if k == 0 { 0.0 } else { out.y[gamma_var] };
    let den = data.e.tr_mul_vec(&p);
    let gains = recover_gains(&q, &den, &prob.bounds)?;
    let mut result = SynthesisResult {
        gains,
        gamma: Some(gamma),
        certificate: PerformanceCertificate { direction: Direction::L1, vector: p, gamma, margin: 0.0 },
        multipliers: q,
    };
    result.certificate.margin = static_slack(data, &result)?;
    Ok(Some(result))
}

/// `A0 + E0·L·F0`.
pub fn static_loop(data: &StaticData, gains: &[f64]) -> Result<Matrix> {
    let elf = data.e.checked_mul(&Matrix::from_diag(gains))?.checked_mul(&data.f)?;
    data.a.checked_add(&elf)
}

/// `C0(I − A0 − E0LF0)⁻¹B0 + D0`.
pub fn static_closed_loop(data: &StaticData, gains: &[f64]) -> Result<Matrix> {
    let m0 = static_loop(data, gains)?;
    let n = m0.rows();
    let x = (&Matrix::identity(n) - &m0).solve_matrix(&data.b)?;
    data.c.checked_mul(&x)?.checked_add(&data.d)
}

/// Smallest slack of the certificate rows for the recovered gains.
fn static_slack(data: &StaticData, result: &SynthesisResult) -> Result<f64> {
    let m0 = static_loop(data, &result.gains)?;
    let p = &result.certificate.vector;
    let gamma = result.certificate.gamma;
    let mtp = m0.tr_mul_vec(p);
    let btp = data.b.tr_mul_vec(p);
    let mut slack = f64::INFINITY;
    for i in 0..p.len() {
        let c1: f64 = (0..data.c.rows()).map(|r| data.c[(r, i)]).sum();
        slack = slack.min(p[i] - mtp[i] - c1);
    }
    for j in 0..btp.len() {
        let d1: f64 = (0..data.d.rows()).map(|r| data.d[(r, j)]).sum();
        slack = slack.min(gamma - btp[j] - d1);
    }
    Ok(slack)
}

/// 1-induced gain of the closed loop, `‖G(0)‖₁`.
pub fn dominated_achieved_norm(prob: &DominatedProblem, gains: &[f64]) -> Result<f64> {
    let data = prob.static_data()?;
    gain_norm(&static_closed_loop(&data, gains)?, NormKind::One)
}

/// Re-checks a dominated synthesis result on static gains.
pub fn verify_dominated(prob: &DominatedProblem, result: &SynthesisResult) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let m = prob.num_gains();
    if result.gains.len() != m {
        return Err(Error::DimensionMismatch(format!("{} gains for {m} channels", result.gains.len())));
    }
    let outside: Vec<usize> =
        (0..m).filter(|&k| !(result.gains[k] >= 0.0) || result.gains[k] > prob.bounds[k] + 1e-12).collect();
    report.push("gains within bounds", outside.is_empty(), format!("violations at {outside:?}"));
    let data = prob.static_data()?;
    let m0 = static_loop(&data, &result.gains)?;
    if !m0.is_nonnegative(1e-12) {
        report.push("static loop gain nonnegative", false, "");
        return Ok(report);
    }
    let rho = linalg::spectral_radius(&m0)?;
    report.push("static loop gain Schur", rho < 1.0, format!("spectral radius {rho}"));
    let slack = static_slack(&data, result)?;
    report.push("certificate rows", slack > 0.0, format!("smallest slack {slack}"));
    if rho < 1.0 {
        let achieved = gain_norm(&static_closed_loop(&data, &result.gains)?, NormKind::One)?;
        let gamma = result.gamma.unwrap_or(f64::INFINITY);
        report.push("achieved norm within γ", achieved <= gamma + 1e-9, format!("achieved {achieved}, certified {gamma}"));
    }
    Ok(report)
}

/// Chain of `n` vehicles with inertia under local feedback
/// `u_i = −k_i x_i − d_i ẋ_i` and tunable springs between neighbours.
///
/// Each node uses the smallest damping keeping every block dominated,
/// `d_i = k_i + Σ_j ℓ̄_ij`. The disturbance enters at vehicle 1 and the
/// output is its position. Gains are ordered `(1,2), (2,1), (2,3), …`.
#[derive(Debug, Clone, PartialEq)]
pub struct InertialChain {
    pub problem: DominatedProblem,
    /// `(i, j)` pairs (0-based) for each gain.
    pub links: Vec<(usize, usize)>,
}

pub fn inertial_chain(n: usize, stiffness: f64, spring_bound: f64) -> Result<InertialChain> {
    if n < 2 {
        return Err(Error::InvalidArgument("a chain needs at least two vehicles".into()));
    }
    if !(stiffness > 0.0) || !(spring_bound > 0.0) {
        return Err(Error::InvalidArgument("stiffness and spring bound must be positive".into()));
    }
    let mut links = Vec::new();
    for i in 0..n - 1 {
        links.push((i, i + 1));
        links.push((i + 1, i));
    }
    let spring_sum: Vec<f64> =
        (0..n).map(|i| links.iter().filter(|(a, _)| *a == i).count() as f64 * spring_bound).collect();
    let lag: Vec<RationalFunction> = (0..n)
        .map(|i| {
            let k = stiffness + spring_sum[i];
            RationalFunction::new(vec![1.0], vec![k, k, 1.0])
        })
        .collect::<Result<_>>()?;

    let m = links.len();
    let a = RationalTransferMatrix::from_fn(n, n, |i, j| {
        if i == j {
            lag[i].scale(spring_sum[i])
        } else {
            RationalFunction::zero()
        }
    });
    let b = RationalTransferMatrix::from_fn(n, 1, |i, _| if i == 0 { lag[0].clone() } else { RationalFunction::zero() });
    let c = RationalTransferMatrix::from_fn(1, n, |_, j| RationalFunction::constant(if j == 0 { 1.0 } else { 0.0 }));
    let d = RationalTransferMatrix::zeros(1, 1);
    let e = RationalTransferMatrix::from_fn(n, m, |i, k| if links[k].0 == i { lag[i].clone() } else { RationalFunction::zero() });
    let f = RationalTransferMatrix::from_fn(m, n, |k, j| {
        let (from, to) = links[k];
        RationalFunction::constant(if j == to {
            1.0
        } else if j == from {
            -1.0
        } else {
            0.0
        })
    });
    let mut problem = DominatedProblem::new(a, b, c, d, e, f)?;
    problem.bounds = vec![spring_bound; m];
    Ok(InertialChain { problem, links })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_feedback_reduces_to_static_certificate() {
        let lag = RationalTransferMatrix::scalar(RationalFunction::first_order(0.5, 1.0));
        let one = RationalTransferMatrix::scalar(RationalFunction::constant(1.0));
        let prob = DominatedProblem::new(
            lag,
            one.clone(),
            one,
            RationalTransferMatrix::zeros(1, 1),
            RationalTransferMatrix::zeros(1, 0),
            RationalTransferMatrix::zeros(0, 1),
        )
        .unwrap();
        let r = synthesize_dominated(&prob).unwrap().unwrap();
        // (1 − 0.5)⁻¹ = 2
        assert!((r.gamma.unwrap() - 2.0).abs() < 1e-6);
        assert!(verify_dominated(&prob, &r).unwrap().pass());
    }

    #[test]
    fn chain_hypotheses_hold() {
        let chain = inertial_chain(4, 1.0, 1.0).unwrap();
        assert!(check_hypotheses(&chain.problem).unwrap().pass());
    }

    #[test]
    fn underdamped_chain_rejected() {
        let mut chain = inertial_chain(3, 1.0, 1.0).unwrap();
        // Lower the damping of the middle node below the dominance threshold.
        let lag = RationalFunction::new(vec![1.0], vec![3.0, 1.0, 1.0]).unwrap();
        chain.problem.a.set(1, 1, lag.scale(2.0));
        assert!(!check_hypotheses(&chain.problem).unwrap().pass());
    }

    #[test]
    fn chain_optimum() {
        let chain = inertial_chain(4, 1.0, 1.0).unwrap();
        let r = synthesize_dominated(&chain.problem).unwrap().unwrap();
        let gamma = r.gamma.unwrap();
        assert!((gamma - 0.5).abs() < 1e-6, "γ = {gamma}");
        assert!(verify_dominated(&chain.problem, &r).unwrap().pass());
        let achieved = dominated_achieved_norm(&chain.problem, &r.gains).unwrap();
        assert!((achieved - 0.5).abs() < 1e-6);
    }
}
