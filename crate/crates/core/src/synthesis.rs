//! Structured static gain synthesis by linear programming.
//!
//! The plant is
//!
//! ```text
//! ẋ = A x + B w + E u      z = C x + D w + G u      y = F x + H w
//! ```
//!
//! closed by a diagonal gain `u = L y` with `0 ≤ L_kk ≤ bound_k`. Writing
//! `μ = L(Fξ + H𝟏)` (or `q = L(Eᵀp + Gᵀ𝟏)` in the 1-induced direction)
//! turns the bilinear certificate conditions into a linear program.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::lp::{LinearProgram, LpStatus};
use crate::performance::{
    gain_norm, static_gain, Direction, NormKind, PerformanceCertificate, PositiveStateSpace,
};
use crate::stability::TimeDomain;

/// Amount by which strict rows are tightened when γ is minimized.
pub const STRICT_TIGHTENING: f64 = 1e-8;
const GAIN_ZERO: f64 = 1e-12;
const STRUCTURE_TOL: f64 = 1e-12;

fn default_bound() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisProblem {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    pub e: Matrix,
    pub f: Matrix,
    pub g: Matrix,
    pub h: Matrix,
    pub direction: Direction,
    /// Upper bound per gain (1 by default).
    pub bounds: Vec<f64>,
    /// Gains with no upper bound.
    #[serde(default)]
    pub unbounded: Vec<bool>,
}

/// What the synthesis LP is asked to do.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisGoal {
    /// Minimize γ directly.
    MinimizeGamma,
    /// Find gains meeting a given γ with the largest uniform slack.
    MeetGamma(f64),
    /// Only make `A + ELF` Hurwitz (disturbance channels are ignored).
    Stabilize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    /// Diagonal of `L`.
    pub gains: Vec<f64>,
    /// Certified bound; `None` for pure stabilization.
    pub gamma: Option<f64>,
    pub certificate: PerformanceCertificate,
    /// `μ` (∞-induced) or `q` (1-induced).
    pub multipliers: Vec<f64>,
}

impl SynthesisResult {
    pub fn gain_matrix(&self) -> Matrix {
        Matrix::from_diag(&self.gains)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CheckReport {
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub(crate) fn push(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), pass, detail: detail.into() });
    }
}

impl SynthesisProblem {
    /// Problem with all gains bounded by 1.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: Matrix,
        b: Matrix,
        c: Matrix,
        d: Matrix,
        e: Matrix,
        f: Matrix,
        g: Matrix,
        h: Matrix,
        direction: Direction,
    ) -> Result<Self> {
        let m = e.cols();
        let prob = Self { a, b, c, d, e, f, g, h, direction, bounds: vec![default_bound(); m], unbounded: vec![false; m] };
        prob.check_dimensions()?;
        Ok(prob)
    }

    pub fn states(&self) -> usize {
        self.a.rows()
    }

    pub fn num_gains(&self) -> usize {
        self.e.cols()
    }

    pub fn is_unbounded(&self, k: usize) -> bool {
        self.unbounded.get(k).copied().unwrap_or(false)
    }

    pub fn check_dimensions(&self) -> Result<()> {
        self.a.require_square()?;
        let n = self.a.rows();
        let k = self.b.cols();
        let l = self.c.rows();
        let m = self.e.cols();
        let expect = [
            ("B", &self.b, (n, k)),
            ("C", &self.c, (l, n)),
            ("D", &self.d, (l, k)),
            ("E", &self.e, (n, m)),
            ("F", &self.f, (m, n)),
            ("G", &self.g, (l, m)),
            ("H", &self.h, (m, k)),
        ];
        for (name, mat, shape) in expect {
            if mat.shape() != shape {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {}x{}",
                    mat.rows(),
                    mat.cols(),
                    shape.0,
                    shape.1
                )));
            }
        }
        if self.bounds.len() != m {
            return Err(Error::DimensionMismatch(format!("{} gain bounds for {m} gains", self.bounds.len())));
        }
        if !self.unbounded.is_empty() && self.unbounded.len() != m {
            return Err(Error::DimensionMismatch(format!("{} unbounded flags for {m} gains", self.unbounded.len())));
        }
        if let Some(b) = self.bounds.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
            return Err(Error::InvalidArgument(format!("gain bound {b} must be finite and nonnegative")));
        }
        Ok(())
    }

    /// The mirrored problem: data transposed and the direction swapped.
    pub fn transposed(&self) -> Self {
        Self {
            a: self.a.transpose(),
            b: self.c.transpose(),
            c: self.b.transpose(),
            d: self.d.transpose(),
            e: self.f.transpose(),
            f: self.e.transpose(),
            g: self.h.transpose(),
            h: self.g.transpose(),
            direction: match self.direction {
                Direction::Linf => Direction::L1,
                Direction::L1 => Direction::Linf,
            },
            bounds: self.bounds.clone(),
            unbounded: self.unbounded.clone(),
        }
    }

    /// Data in the orientation solved by the ∞-induced LP.
    fn oriented(&self) -> Self {
        match self.direction {
            Direction::Linf => self.clone(),
            Direction::L1 => self.transposed(),
        }
    }

    /// Closed-loop system for given gains.
    pub fn closed_loop(&self, gains: &[f64]) -> Result<PositiveStateSpace> {
        self.check_dimensions()?;
        if gains.len() != self.num_gains() {
            return Err(Error::DimensionMismatch(format!(
                "{} gains for {} channels",
                gains.len(),
                self.num_gains()
            )));
        }
        let l = Matrix::from_diag(gains);
        let el = self.e.checked_mul(&l)?;
        let gl = self.g.checked_mul(&l)?;
        let a = &self.a + &el.checked_mul(&self.f)?;
        let b = &self.b + &el.checked_mul(&self.h)?;
        let c = &self.c + &gl.checked_mul(&self.f)?;
        let d = &self.d + &gl.checked_mul(&self.h)?;
        // round-off can leave -0 style residue on structurally zero entries
        let clean = |m: Matrix| m.map(|v| if v.abs() < 1e-14 { 0.0 } else { v });
        Ok(PositiveStateSpace { a: clean(a), b: clean(b), c: clean(c), d: clean(d), time_domain: TimeDomain::Continuous })
    }
}

/// Worst case over the gain box of one entry of `X + Y L Z`.
fn worst_entry(x: f64, y: &Matrix, z: &Matrix, i: usize, j: usize, prob: &SynthesisProblem) -> f64 {
    let mut v = x;
    for k in 0..prob.num_gains() {
        let prod = y[(i, k)] * z[(k, j)];
        if prod < 0.0 {
            v += if prob.is_unbounded(k) { f64::NEG_INFINITY } else { prod * prob.bounds[k] };
        }
    }
    v
}

/// Checks the sign hypotheses for every admissible gain, in closed form:
/// each entry is affine in each gain, so the box minimum is attained by
/// taking every negative contribution at its bound.
pub fn validate_structure(prob: &SynthesisProblem) -> CheckReport {
    let mut report = CheckReport::default();
    if let Err(e) = prob.check_dimensions() {
        report.push("dimensions", false, e.to_string());
        return report;
    }
    report.push("dimensions", true, "consistent");

    let n = prob.states();
    let mut worst_metzler = (f64::INFINITY, 0, 0);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = worst_entry(prob.a[(i, j)], &prob.e, &prob.f, i, j, prob);
                if v < worst_metzler.0 {
                    worst_metzler = (v, i, j);
                }
            }
        }
    }
    report.push(
        "A+ELF Metzler",
        worst_metzler.0 >= -STRUCTURE_TOL,
        format!("smallest off-diagonal over the gain box: {} at ({},{})", worst_metzler.0, worst_metzler.1, worst_metzler.2),
    );

    let blocks: [(&str, &Matrix, &Matrix, &Matrix); 3] = [
        ("C+GLF nonnegative", &prob.c, &prob.g, &prob.f),
        ("B+ELH nonnegative", &prob.b, &prob.e, &prob.h),
        ("D+GLH nonnegative", &prob.d, &prob.g, &prob.h),
    ];
    for (name, x, y, z) in blocks {
        let mut worst = (f64::INFINITY, 0, 0);
        for i in 0..x.rows() {
            for j in 0..x.cols() {
                let v = worst_entry(x[(i, j)], y, z, i, j, prob);
                if v < worst.0 {
                    worst = (v, i, j);
                }
            }
        }
        let detail = if worst.0.is_finite() || worst.0 < 0.0 {
            format!("smallest entry over the gain box: {} at ({},{})", worst.0, worst.1, worst.2)
        } else {
            "empty".to_string()
        };
        report.push(name, worst.0 >= -STRUCTURE_TOL, detail);
    }

    match prob.direction {
        Direction::Linf => {
            report.push("F nonnegative", prob.f.is_nonnegative(0.0), "required for the ∞-induced synthesis");
        }
        Direction::L1 => {
            let ok = prob.b.is_nonnegative(0.0) && prob.d.is_nonnegative(0.0) && prob.e.is_nonnegative(0.0);
            report.push("B, D, E nonnegative", ok, "required for the 1-induced synthesis");
        }
    }
    report
}

/// `L_kk = μ_k / den_k`, clamped to `[0, bound_k]`.
pub fn recover_gains(mu: &[f64], denominators: &[f64], bounds: &[f64]) -> Result<Vec<f64>> {
    if mu.len() != denominators.len() || mu.len() != bounds.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} multipliers, {} denominators, {} bounds",
            mu.len(),
            denominators.len(),
            bounds.len()
        )));
    }
    mu.iter()
        .zip(denominators)
        .zip(bounds)
        .enumerate()
        .map(|(k, ((&m, &den), &bound))| {
            if den <= GAIN_ZERO {
                if m <= GAIN_ZERO {
                    Ok(0.0)
                } else {
                    Err(Error::InvalidArgument(format!(
                        "multiplier {k} is {m} but its denominator is {den}; certificate is inconsistent"
                    )))
                }
            } else {
                Ok((m / den).clamp(0.0, bound))
            }
        })
        .collect()
}

/// Solves the synthesis LP and recovers the gains. `Ok(None)` means no
/// admissible gain achieves the goal.
pub fn synthesize(prob: &SynthesisProblem, goal: SynthesisGoal) -> Result<Option<SynthesisResult>> {
    let structure = validate_structure(prob);
    if !structure.pass() {
        let msgs: Vec<String> = structure.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        return Err(Error::Hypothesis(msgs.join("; ")));
    }
    if let SynthesisGoal::MeetGamma(g) = goal {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::InvalidArgument(format!("γ must be positive and finite, got {g}")));
        }
    }
    let data = prob.oriented();
    let first = solve_oriented(&data, goal, STRICT_TIGHTENING)?;
    let Some(result) = first else { return Ok(None) };
    let result = finish(prob, &data, result)?;
    if certificate_holds(prob, &result)? {
        return Ok(Some(result));
    }
    // Degenerate vertex: retry once with a larger tightening.
    let Some(second) = solve_oriented(&data, goal, 1e3 * STRICT_TIGHTENING)? else { return Ok(None) };
    let result = finish(prob, &data, second)?;
    if certificate_holds(prob, &result)? {
        Ok(Some(result))
    } else {
        Err(Error::Infeasible("recovered gains fail re-verification".into()))
    }
}

struct RawSolution {
    vector: Vec<f64>,
    multipliers: Vec<f64>,
    gamma: Option<f64>,
}

/// LP in ∞-induced orientation over `(ξ, μ, γ)`.
fn solve_oriented(data: &SynthesisProblem, goal: SynthesisGoal, delta: f64) -> Result<Option<RawSolution>> {
    let n = data.states();
    let m = data.num_gains();
    let l = data.c.rows();
    let stabilize = goal == SynthesisGoal::Stabilize;
    let nv = n + m + 1;
    let gamma_var = n + m;
    let b1: Vec<f64> = (0..n).map(|i| if stabilize { 0.0 } else { data.b.row(i).iter().sum() }).collect();
    let d1: Vec<f64> = (0..l).map(|i| data.d.row(i).iter().sum()).collect();
    let h1: Vec<f64> = (0..m).map(|k| if stabilize { 0.0 } else { data.h.row(k).iter().sum() }).collect();

    let mut lp = LinearProgram::new(nv);
    for i in 0..n {
        let mut row = vec![0.0; nv];
        row[..n].copy_from_slice(data.a.row(i));
        row[n..n + m].copy_from_slice(data.e.row(i));
        lp.add_lt(&row, -b1[i]);
    }
    if !stabilize {
        for j in 0..l {
            let mut row = vec![0.0; nv];
            row[..n].copy_from_slice(data.c.row(j));
            row[n..n + m].copy_from_slice(data.g.row(j));
            match goal {
                SynthesisGoal::MinimizeGamma => {
                    row[gamma_var] = -1.0;
                    lp.add_lt(&row, -d1[j]);
                }
                SynthesisGoal::MeetGamma(g) => {
                    lp.add_lt(&row, g - d1[j]);
                }
                SynthesisGoal::Stabilize => unreachable!(),
            }
        }
    }
    for k in 0..m {
        let mut row = vec![0.0; nv];
        if data.is_unbounded(k) {
            // Fξ + H𝟏 ≥ 0
            for (j, v) in data.f.row(k).iter().enumerate() {
                row[j] = -v;
            }
            lp.add_le(&row, h1[k]);
        } else {
            let bound = data.bounds[k];
            for (j, v) in data.f.row(k).iter().enumerate() {
                row[j] = -bound * v;
            }
            row[n + k] = 1.0;
            lp.add_le(&row, bound * h1[k]);
        }
    }

    let out = match goal {
        SynthesisGoal::MinimizeGamma => {
            lp.objective[gamma_var] = 1.0;
            lp.solve_tightened(delta)?
        }
        SynthesisGoal::MeetGamma(_) => lp.feasibility_with_margin()?,
        SynthesisGoal::Stabilize => {
            for i in 0..n {
                let mut e = vec![0.0; nv];
                e[i] = 1.0;
                lp.add_gt(&e, 0.0);
                lp.add_le(&e, n as f64);
            }
            lp.feasibility_with_margin()?
        }
    };
    if out.status != LpStatus::Optimal {
        return Ok(None);
    }
    let gamma = match goal {
        SynthesisGoal::MinimizeGamma => Some(if l == 0 { 0.0 } else { out.y[gamma_var] }),
        SynthesisGoal::MeetGamma(g) => Some(g),
        SynthesisGoal::Stabilize => None,
    };
    Ok(Some(RawSolution { vector: out.y[..n].to_vec(), multipliers: out.y[n..n + m].to_vec(), gamma }))
}

fn finish(prob: &SynthesisProblem, data: &SynthesisProblem, raw: RawSolution) -> Result<SynthesisResult> {
    let m = data.num_gains();
    let stabilize = raw.gamma.is_none();
    let fx = data.f.mul_vec(&raw.vector);
    let den: Vec<f64> = (0..m)
        .map(|k| fx[k] + if stabilize { 0.0 } else { data.h.row(k).iter().sum::<f64>() })
        .collect();
    let upper: Vec<f64> = (0..m)
        .map(|k| if data.is_unbounded(k) { f64::INFINITY } else { data.bounds[k] })
        .collect();
    let gains = recover_gains(&raw.multipliers, &den, &upper)?;
    let mut result = SynthesisResult {
        gains,
        gamma: raw.gamma,
        certificate: PerformanceCertificate {
            direction: prob.direction,
            vector: raw.vector,
            gamma: raw.gamma.unwrap_or(f64::INFINITY),
            margin: 0.0,
        },
        multipliers: raw.multipliers,
    };
    result.certificate.margin = closed_loop_slack(prob, &result)?;
    Ok(result)
}

/// Slacks of the synthesis LP rows at a given `(ξ, μ)` (or `(p, q)` for the
/// 1-induced direction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSlacks {
    /// `−(Aξ + Eμ + B𝟏)` per state; the disturbance term is dropped when
    /// `gamma` is `None`.
    pub dynamics: Vec<f64>,
    /// `γ − (Cξ + Gμ + D𝟏)` per output; empty when `gamma` is `None`.
    pub outputs: Vec<f64>,
    /// `ℓ̄_k(Fξ + H𝟏)_k − μ_k`, or `(Fξ + H𝟏)_k` for unbounded gains.
    pub gain_rows: Vec<f64>,
    /// Gains `μ ⊘ (Fξ + H𝟏)` encoded by the point.
    pub gains: Vec<f64>,
}

impl PointSlacks {
    /// Smallest slack over the strict rows.
    pub fn strict_min(&self) -> f64 {
        self.dynamics.iter().chain(&self.outputs).fold(f64::INFINITY, |m, v| m.min(*v))
    }

    /// Every strict row positive and every bound row nonnegative.
    pub fn feasible(&self, vector: &[f64], multipliers: &[f64]) -> bool {
        self.strict_min() > 0.0
            && self.gain_rows.iter().all(|v| *v >= 0.0)
            && vector.iter().chain(multipliers).all(|v| *v >= 0.0)
    }
}

pub fn point_slacks(prob: &SynthesisProblem, vector: &[f64], multipliers: &[f64], gamma: Option<f64>) -> Result<PointSlacks> {
    prob.check_dimensions()?;
    let data = prob.oriented();
    let n = data.states();
    let m = data.num_gains();
    if vector.len() != n || multipliers.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "point has {} + {} entries, expected {n} + {m}",
            vector.len(),
            multipliers.len()
        )));
    }
    let ax = data.a.mul_vec(vector);
    let em = data.e.mul_vec(multipliers);
    let dynamics = (0..n)
        .map(|i| {
            let b1: f64 = if gamma.is_some() { data.b.row(i).iter().sum() } else { 0.0 };
            -(ax[i] + em[i] + b1)
        })
        .collect();
    let outputs = match gamma {
        Some(g) => {
            let cx = data.c.mul_vec(vector);
            let gm = data.g.mul_vec(multipliers);
            (0..data.c.rows()).map(|j| g - cx[j] - gm[j] - data.d.row(j).iter().sum::<f64>()).collect()
        }
        None => Vec::new(),
    };
    let fx = data.f.mul_vec(vector);
    let den: Vec<f64> = (0..m)
        .map(|k| fx[k] + if gamma.is_some() { data.h.row(k).iter().sum::<f64>() } else { 0.0 })
        .collect();
    let gain_rows =
        (0..m).map(|k| if data.is_unbounded(k) { den[k] } else { data.bounds[k] * den[k] - multipliers[k] }).collect();
    let upper: Vec<f64> = (0..m).map(|k| if data.is_unbounded(k) { f64::INFINITY } else { data.bounds[k] }).collect();
    let gains = recover_gains(multipliers, &den, &upper)?;
    Ok(PointSlacks { dynamics, outputs, gain_rows, gains })
}

/// Smallest slack of the closed-loop certificate inequalities.
pub fn closed_loop_slack(prob: &SynthesisProblem, result: &SynthesisResult) -> Result<f64> {
    let cl = prob.closed_loop(&result.gains)?;
    let oriented = match prob.direction {
        Direction::Linf => cl,
        Direction::L1 => PositiveStateSpace {
            a: cl.a.transpose(),
            b: cl.c.transpose(),
            c: cl.b.transpose(),
            d: cl.d.transpose(),
            time_domain: cl.time_domain,
        },
    };
    let v = &result.certificate.vector;
    let av = oriented.a.mul_vec(v);
    let mut slack = f64::INFINITY;
    let stabilize = result.gamma.is_none();
    for i in 0..oriented.states() {
        let b1: f64 = if stabilize { 0.0 } else { oriented.b.row(i).iter().sum() };
        slack = slack.min(-(av[i] + b1));
    }
    if let Some(gamma) = result.gamma {
        let cv = oriented.c.mul_vec(v);
        for j in 0..oriented.outputs() {
            let d1: f64 = oriented.d.row(j).iter().sum();
            slack = slack.min(gamma - cv[j] - d1);
        }
    }
    if let Some(neg) = v.iter().find(|x| **x < 0.0) {
        slack = slack.min(*neg);
    }
    Ok(slack)
}

fn certificate_holds(prob: &SynthesisProblem, result: &SynthesisResult) -> Result<bool> {
    Ok(closed_loop_slack(prob, result)? > 0.0)
}

/// Re-checks a synthesis result from scratch on the closed loop.
pub fn verify_synthesis(prob: &SynthesisProblem, result: &SynthesisResult) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let m = prob.num_gains();
    if result.gains.len() != m {
        return Err(Error::DimensionMismatch(format!("{} gains for {m} channels", result.gains.len())));
    }
    let out_of_box: Vec<usize> = (0..m)
        .filter(|&k| {
            let g = result.gains[k];
            !(g >= 0.0) || (!prob.is_unbounded(k) && g > prob.bounds[k] + 1e-12)
        })
        .collect();
    report.push("gains within bounds", out_of_box.is_empty(), format!("violations at {out_of_box:?}"));

    let cl = prob.closed_loop(&result.gains)?;
    report.push("closed-loop A Metzler", cl.a.metzler_violation(1e-12)?.is_none(), "");
    let nonneg = cl.b.is_nonnegative(1e-12) && cl.c.is_nonnegative(1e-12) && cl.d.is_nonnegative(1e-12);
    report.push("closed-loop B, C, D nonnegative", nonneg, "");
    if !(report.pass()) {
        return Ok(report);
    }

    let abscissa = linalg::spectral_abscissa(&cl.a)?;
    report.push("closed loop Hurwitz", abscissa < 0.0, format!("spectral abscissa {abscissa}"));
    let slack = closed_loop_slack(prob, result)?;
    report.push("certificate rows", slack > 0.0, format!("smallest slack {slack}"));

    if abscissa < 0.0 {
        if let Some(gamma) = result.gamma {
            let kind = match prob.direction {
                Direction::Linf => NormKind::Inf,
                Direction::L1 => NormKind::One,
            };
            let achieved = gain_norm(&static_gain(&cl)?, kind)?;
            report.push(
                "achieved norm within γ",
                achieved <= gamma + 1e-9,
                format!("achieved {achieved}, certified {gamma}"),
            );
        }
    }
    Ok(report)
}

/// Achieved closed-loop norm in the problem's direction.
pub fn achieved_norm(prob: &SynthesisProblem, gains: &[f64]) -> Result<f64> {
    let cl = prob.closed_loop(gains)?;
    let kind = match prob.direction {
        Direction::Linf => NormKind::Inf,
        Direction::L1 => NormKind::One,
    };
    gain_norm(&static_gain(&cl)?, kind)
}
