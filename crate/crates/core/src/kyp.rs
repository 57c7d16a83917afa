//! KYP conditions for positive systems.
//!
//! For Metzler Hurwitz `A`, `B ≥ 0` and a weight `Q` that is nonnegative
//! outside its last `m` diagonal entries, four statements are equivalent:
//!
//! 1. the quadratic form on `[(iωI − A)⁻¹B; I]` is NSD for every `ω`,
//! 2. the same holds at `ω = 0`,
//! 3. a diagonal `P ⪰ 0` makes `Q + [AᵀP + PA, PB; BᵀP, 0] ⪯ 0`,
//! 4. a nonnegative vector triple solves a linear feasibility problem.
//!
//! Discrete time replaces `iω` by `e^{iω}` and `0` by `1`. Non-strict
//! equivalence needs `(−A, B)` stabilizable; the strict versions do not.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutting_plane::{find_feasible, AffineSymmetric, CutOptions, CutStatus};
use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_lambda_max, CMatrix, Matrix};
use crate::lp::{LinearProgram, LpStatus};
use crate::stability::TimeDomain;

/// Non-strict acceptance level for the frequency sweep.
pub const FREQUENCY_TOL: f64 = 1e-7;
/// Non-strict acceptance level for the zero-frequency form.
pub const STATIC_TOL: f64 = 1e-9;
/// Non-strict acceptance level for the diagonal `P` search.
pub const DIAGONAL_TOL: f64 = 1e-8;
/// Required margin below zero in strict mode.
pub const STRICT_MARGIN: f64 = 1e-9;
/// Default number of log-spaced frequencies.
pub const DEFAULT_GRID: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KypMode {
    #[default]
    Strict,
    NonStrict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Unknown,
}

impl Verdict {
    fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KypInstance {
    pub a: Matrix,
    pub b: Matrix,
    pub q: Matrix,
    #[serde(default)]
    pub time_domain: TimeDomain,
}

impl KypInstance {
    /// Checks shapes, symmetry of `Q`, the sign pattern of `A`, `B`, `Q`
    /// and stability of `A`.
    pub fn new(a: Matrix, b: Matrix, q: Matrix, time_domain: TimeDomain) -> Result<Self> {
        let inst = Self::unchecked(a, b, q, time_domain)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn continuous(a: Matrix, b: Matrix, q: Matrix) -> Result<Self> {
        Self::new(a, b, q, TimeDomain::Continuous)
    }

    pub fn discrete(a: Matrix, b: Matrix, q: Matrix) -> Result<Self> {
        Self::new(a, b, q, TimeDomain::Discrete)
    }

    /// Shape and symmetry checks only.
    pub fn unchecked(a: Matrix, b: Matrix, q: Matrix, time_domain: TimeDomain) -> Result<Self> {
        a.require_square()?;
        let n = a.rows();
        if b.rows() != n || b.cols() == 0 {
            return Err(Error::DimensionMismatch(format!("B is {}x{}, expected {n}xm with m ≥ 1", b.rows(), b.cols())));
        }
        let size = n + b.cols();
        if q.shape() != (size, size) {
            return Err(Error::DimensionMismatch(format!("Q is {}x{}, expected {size}x{size}", q.rows(), q.cols())));
        }
        let asym = q.asymmetry();
        if asym > 1e-9 * q.max_abs().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        for m in [&a, &b, &q] {
            if m.as_slice().iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("KYP data".into()));
            }
        }
        Ok(Self { a, b, q: q.symmetrize(), time_domain })
    }

    pub fn states(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.states();
        match self.time_domain {
            TimeDomain::Continuous => {
                self.a.require_metzler(0.0)?;
                let s = linalg::spectral_abscissa(&self.a)?;
                if !(s < 0.0) {
                    return Err(Error::Unstable(format!("A is not Hurwitz (spectral abscissa {s})")));
                }
            }
            TimeDomain::Discrete => {
                self.a.require_nonnegative(0.0)?;
                let r = linalg::spectral_radius(&self.a)?;
                if !(r < 1.0) {
                    return Err(Error::Unstable(format!("A is not Schur (spectral radius {r})")));
                }
            }
        }
        self.b.require_nonnegative(0.0)?;
        let size = self.q.rows();
        for i in 0..size {
            for j in 0..size {
                if i == j && i >= n {
                    continue;
                }
                let v = self.q[(i, j)];
                if v < 0.0 {
                    return Err(Error::NegativeEntry { row: i, col: j, value: v });
                }
            }
        }
        Ok(())
    }

    /// Rank test on `[B, AB, …, Aⁿ⁻¹B]`. With `A` Hurwitz (or Schur) every
    /// mode of `−A` (or `A⁻¹`) is unstable, so stabilizability of `(−A, B)`
    /// and anti-stabilizability of `(A, B)` both reduce to controllability.
    pub fn is_stabilizable(&self) -> bool {
        let n = self.states();
        let m = self.inputs();
        let mut blocks = Matrix::zeros(n, n * m);
        let mut cur = self.b.clone();
        for k in 0..n {
            let scale = cur.max_abs();
            for i in 0..n {
                for j in 0..m {
                    blocks[(i, k * m + j)] = if scale > 0.0 { cur[(i, j)] / scale } else { 0.0 };
                }
            }
            cur = &self.a * &cur;
        }
        linalg::rank(&blocks, 1e-10) == n
    }

    /// `[M; I]` where `M` is the zero-frequency map `−A⁻¹B` or `(I − A)⁻¹B`.
    fn zero_frequency_map(&self) -> Result<Matrix> {
        let n = self.states();
        let lhs = match self.time_domain {
            TimeDomain::Continuous => self.a.scale(-1.0),
            TimeDomain::Discrete => &Matrix::identity(n) - &self.a,
        };
        let top = lhs.solve_matrix(&self.b).map_err(|_| Error::Singular)?;
        top.vstack(&Matrix::identity(self.inputs()))
    }

    /// The `m×m` form at zero frequency.
    pub fn static_form(&self) -> Result<Matrix> {
        let w = self.zero_frequency_map()?;
        Ok((&(&w.transpose() * &self.q) * &w).symmetrize())
    }

    /// The Hermitian `m×m` form at frequency `ω`. Continuous `ω = ∞` gives
    /// the lower-right block of `Q`.
    pub fn frequency_form(&self, omega: f64) -> Result<CMatrix> {
        let n = self.states();
        let m = self.inputs();
        if omega.is_infinite() && self.time_domain == TimeDomain::Continuous {
            return Ok(CMatrix::from_real(&self.q.block(n, n, m, m)));
        }
        let z = match self.time_domain {
            TimeDomain::Continuous => Complex64::new(0.0, omega),
            TimeDomain::Discrete => Complex64::from_polar(1.0, omega),
        };
        let top = linalg::resolvent_times(&self.a, &self.b, z)?;
        let mut w = CMatrix::zeros(n + m, m);
        for i in 0..n {
            for j in 0..m {
                w.set(i, j, top.get(i, j));
            }
        }
        for j in 0..m {
            w.set(n + j, j, Complex64::new(1.0, 0.0));
        }
        let qw = CMatrix::from_real(&self.q).mul(&w)?;
        w.conj_transpose().mul(&qw)
    }

    /// Terms `T_i` with `Q + Σ p_i T_i` the matrix of the diagonal-`P`
    /// condition.
    pub fn lyapunov_terms(&self) -> Vec<Matrix> {
        let n = self.states();
        let m = self.inputs();
        let size = n + m;
        (0..n)
            .map(|i| {
                let k: Vec<f64> = (0..size).map(|c| if c < n { self.a[(i, c)] } else { self.b[(i, c - n)] }).collect();
                match self.time_domain {
                    TimeDomain::Continuous => Matrix::from_fn(size, size, |r, c| {
                        let e_r = if r == i { 1.0 } else { 0.0 };
                        let e_c = if c == i { 1.0 } else { 0.0 };
                        e_r * k[c] + k[r] * e_c
                    }),
                    TimeDomain::Discrete => Matrix::from_fn(size, size, |r, c| {
                        let e = if r == i && c == i { 1.0 } else { 0.0 };
                        k[r] * k[c] - e
                    }),
                }
            })
            .collect()
    }

    /// `Q + Σ p_i T_i`.
    pub fn lyapunov_matrix(&self, p_diag: &[f64]) -> Result<Matrix> {
        if p_diag.len() != self.states() {
            return Err(Error::DimensionMismatch(format!("P has {} entries, expected {}", p_diag.len(), self.states())));
        }
        let mut s = self.q.clone();
        for (t, &p) in self.lyapunov_terms().iter().zip(p_diag) {
            s = &s + &t.scale(p);
        }
        Ok(s.symmetrize())
    }
}

/// Largest eigenvalue found by a check together with its verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormCheck {
    pub lambda_max: f64,
    /// Frequency attaining `lambda_max` (zero for the static check).
    pub omega: f64,
    pub holds: bool,
}

fn accept(value: f64, mode: KypMode, tol: f64) -> bool {
    match mode {
        KypMode::NonStrict => value <= tol,
        KypMode::Strict => value < -STRICT_MARGIN,
    }
}

/// Zero-frequency condition.
pub fn kyp_static(inst: &KypInstance, mode: KypMode) -> Result<FormCheck> {
    let form = inst.static_form()?;
    let lambda_max = linalg::lambda_max(&form)?;
    Ok(FormCheck { lambda_max, omega: 0.0, holds: accept(lambda_max, mode, STATIC_TOL) })
}

/// `count` log-spaced frequencies in `[10⁻³, 10³]` (continuous) or evenly
/// spaced in `(0, π]` (discrete).
pub fn default_grid(domain: TimeDomain, count: usize) -> Vec<f64> {
    match domain {
        TimeDomain::Continuous => {
            let (lo, hi) = (-3.0f64, 3.0f64);
            (0..count)
                .map(|k| {
                    let t = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.5 };
                    10f64.powf(lo + t * (hi - lo))
                })
                .collect()
        }
        TimeDomain::Discrete => (1..=count).map(|k| std::f64::consts::PI * k as f64 / count as f64).collect(),
    }
}

/// Frequency condition on `grid`, always including `ω = 0` and, in
/// continuous time, `ω = ∞`. A failure is a genuine refutation; success
/// only covers the sampled points.
pub fn kyp_frequency(inst: &KypInstance, grid: &[f64], mode: KypMode) -> Result<FormCheck> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("frequency grid is empty".into()));
    }
    let mut points = vec![0.0];
    points.extend_from_slice(grid);
    if inst.time_domain == TimeDomain::Continuous {
        points.push(f64::INFINITY);
    }
    let mut worst = FormCheck { lambda_max: f64::NEG_INFINITY, omega: 0.0, holds: true };
    for &w in &points {
        let lam = hermitian_lambda_max(&inst.frequency_form(w)?)?;
        if lam > worst.lambda_max {
            worst.lambda_max = lam;
            worst.omega = w;
        }
    }
    worst.holds = accept(worst.lambda_max, mode, FREQUENCY_TOL);
    Ok(worst)
}

/// Nonnegative `(x, u, p)` for the linear condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearWitness {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
}

/// Residuals of the linear condition, each required `≤ 0` (or `< 0`):
/// the dynamics rows followed by the `Q` rows.
pub fn linear_residuals(inst: &KypInstance, w: &LinearWitness) -> Result<Vec<f64>> {
    let n = inst.states();
    let m = inst.inputs();
    if w.x.len() != n || w.u.len() != m || w.p.len() != n {
        return Err(Error::DimensionMismatch("witness lengths".into()));
    }
    let ax = inst.a.mul_vec(&w.x);
    let bu = inst.b.mul_vec(&w.u);
    let mut out: Vec<f64> = (0..n)
        .map(|i| match inst.time_domain {
            TimeDomain::Continuous => ax[i] + bu[i],
            TimeDomain::Discrete => ax[i] + bu[i] - w.x[i],
        })
        .collect();
    let xu: Vec<f64> = w.x.iter().chain(&w.u).copied().collect();
    let qxu = inst.q.mul_vec(&xu);
    let atp = inst.a.tr_mul_vec(&w.p);
    let btp = inst.b.tr_mul_vec(&w.p);
    for r in 0..n {
        let shift = if inst.time_domain == TimeDomain::Discrete { w.p[r] } else { 0.0 };
        out.push(qxu[r] + atp[r] - shift);
    }
    for j in 0..m {
        out.push(qxu[n + j] + btp[j]);
    }
    Ok(out)
}

/// Linear condition as a margin LP over `x, u, p ≥ 0` normalized by
/// `𝟏ᵀ(x + u) = 1`.
///
/// The non-strict form also asks for `u > 0`: without it, `u = 0` with a
/// nonzero `x` can satisfy the rows even when the static form is
/// indefinite, while any `u > 0` solution certifies it NSD. Strict mode
/// makes every row, including the sign constraints, strict.
pub fn kyp_lp_certificate(inst: &KypInstance, mode: KypMode) -> Result<Option<LinearWitness>> {
    let n = inst.states();
    let m = inst.inputs();
    let nv = 2 * n + m;
    let (xs, us, ps) = (0, n, n + m);
    let mut lp = LinearProgram::new(nv);
    let strict = mode == KypMode::Strict;
    let push = |lp: &mut LinearProgram, row: Vec<f64>, strict_row: bool| {
        if strict_row {
            lp.add_lt(&row, 0.0);
        } else {
            lp.add_le(&row, 0.0);
        }
    };
    for i in 0..n {
        let mut row = vec![0.0; nv];
        for c in 0..n {
            row[xs + c] = inst.a[(i, c)];
        }
        if inst.time_domain == TimeDomain::Discrete {
            row[xs + i] -= 1.0;
        }
        for j in 0..m {
            row[us + j] = inst.b[(i, j)];
        }
        push(&mut lp, row, strict);
    }
    for r in 0..n + m {
        let mut row = vec![0.0; nv];
        for c in 0..n + m {
            row[c] = inst.q[(r, c)];
        }
        for k in 0..n {
            row[ps + k] = if r < n { inst.a[(k, r)] } else { inst.b[(k, r - n)] };
        }
        if r < n && inst.time_domain == TimeDomain::Discrete {
            row[ps + r] -= 1.0;
        }
        push(&mut lp, row, strict);
    }
    for v in 0..nv {
        let positive = (us..ps).contains(&v) || strict;
        if positive {
            let mut row = vec![0.0; nv];
            row[v] = -1.0;
            lp.add_lt(&row, 0.0);
        }
    }
    let mut norm = vec![0.0; nv];
    norm[..n + m].iter_mut().for_each(|c| *c = 1.0);
    lp.add_eq(&norm, 1.0);
    let out = lp.feasibility_with_margin()?;
    Ok(match out.status {
        LpStatus::Optimal => {
            let y: Vec<f64> = out.y.iter().map(|v| v.max(0.0)).collect();
            Some(LinearWitness { x: y[xs..us].to_vec(), u: y[us..ps].to_vec(), p: y[ps..].to_vec() })
        }
        _ => None,
    })
}

/// Outcome of the diagonal `P` search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSearch {
    pub verdict: Verdict,
    /// Best diagonal found (a witness when the verdict holds).
    pub p_diag: Vec<f64>,
    pub lambda_max: f64,
    pub cuts: usize,
}

/// Diagonal `P ⪰ 0` condition by eigenvector cutting planes over the
/// diagonal entries. Running out of cuts yields [`Verdict::Unknown`].
pub fn kyp_diagonal_p(inst: &KypInstance, mode: KypMode) -> Result<DiagonalSearch> {
    kyp_diagonal_p_with(inst, mode, &CutOptions::default())
}

pub fn kyp_diagonal_p_with(inst: &KypInstance, mode: KypMode, opts: &CutOptions) -> Result<DiagonalSearch> {
    let pencil = AffineSymmetric::new(inst.q.clone(), inst.lyapunov_terms())?;
    let target = match mode {
        KypMode::NonStrict => DIAGONAL_TOL,
        KypMode::Strict => -2.0 * STRICT_MARGIN,
    };
    let out = find_feasible(&pencil, opts, target)?;
    let verdict = match out.status {
        CutStatus::Feasible => Verdict::Holds,
        CutStatus::Infeasible => Verdict::Fails,
        CutStatus::Unknown => Verdict::Unknown,
    };
    Ok(DiagonalSearch { verdict, p_diag: out.z, lambda_max: out.lambda_max, cuts: out.cuts })
}

/// A discrete instance mapped to continuous time by `z = (1 + s)/(1 − s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearTransform {
    /// `(Â, B̂, Q̂)`; not required to meet the sign hypotheses.
    pub continuous: KypInstance,
    /// `S = [(A + I)⁻¹, −(A + I)⁻¹B; 0, I]`.
    pub congruence: Matrix,
}

impl BilinearTransform {
    /// `(x, u) = S(x̂, u)` with `p` unchanged.
    pub fn witness_back(&self, w: &LinearWitness) -> LinearWitness {
        let xu: Vec<f64> = w.x.iter().chain(&w.u).copied().collect();
        let mapped = self.congruence.mul_vec(&xu);
        let n = w.x.len();
        LinearWitness { x: mapped[..n].to_vec(), u: w.u.clone(), p: w.p.clone() }
    }

    /// The continuous condition holds at `P̂` iff the discrete one holds
    /// at `2P̂`.
    pub fn p_back(&self, p_hat: &[f64]) -> Vec<f64> {
        p_hat.iter().map(|p| 2.0 * p).collect()
    }

    /// Inverse of [`Self::p_back`].
    pub fn p_forward(&self, p: &[f64]) -> Vec<f64> {
        p.iter().map(|p| 0.5 * p).collect()
    }
}

/// `Â = (A − I)(A + I)⁻¹`, `B̂ = 2(A + I)⁻¹B`, `Q̂ = SᵀQS`.
pub fn bilinear_transform(inst: &KypInstance) -> Result<BilinearTransform> {
    if inst.time_domain != TimeDomain::Discrete {
        return Err(Error::InvalidArgument("bilinear transform expects a discrete-time instance".into()));
    }
    let n = inst.states();
    let m = inst.inputs();
    let eye = Matrix::identity(n);
    let a_plus = &inst.a + &eye;
    let inv = a_plus.inverse().map_err(|_| Error::Singular)?;
    let a_hat = &(&inst.a - &eye) * &inv;
    let inv_b = &inv * &inst.b;
    let b_hat = inv_b.scale(2.0);
    let s = Matrix::from_fn(n + m, n + m, |r, c| match (r < n, c < n) {
        (true, true) => inv[(r, c)],
        (true, false) => -inv_b[(r, c - n)],
        (false, true) => 0.0,
        (false, false) => f64::from(u8::from(r == c)),
    });
    let q_hat = (&(&s.transpose() * &inst.q) * &s).symmetrize();
    let continuous = KypInstance::unchecked(a_hat, b_hat, q_hat, TimeDomain::Continuous)?;
    Ok(BilinearTransform { continuous, congruence: s })
}

/// All four conditions with witnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KypReport {
    pub mode: KypMode,
    pub time_domain: TimeDomain,
    pub frequency: Verdict,
    pub zero_frequency: Verdict,
    pub diagonal_p: Verdict,
    pub linear: Verdict,
    /// Worst sampled eigenvalue and where it occurred.
    pub frequency_check: FormCheck,
    pub static_check: FormCheck,
    pub diagonal_lambda_max: f64,
    pub p_diag: Option<Vec<f64>>,
    pub linear_witness: Option<LinearWitness>,
    /// Stabilizability of `(−A, B)` (anti-stabilizability of `(A, B)` in
    /// discrete time).
    pub stabilizable: bool,
    /// False when the non-strict equivalence is not guaranteed.
    pub hypotheses_met: bool,
}

impl KypReport {
    pub fn verdicts(&self) -> [Verdict; 4] {
        [self.frequency, self.zero_frequency, self.diagonal_p, self.linear]
    }

    /// All four verdicts equal and none unknown.
    pub fn agree(&self) -> bool {
        let v = self.verdicts();
        v[0] != Verdict::Unknown && v.iter().all(|x| *x == v[0])
    }

    /// e.g. `conditions 1,2,4 hold; 3 infeasible; (−A,B) not stabilizable`.
    pub fn summary(&self) -> String {
        let group = |target: Verdict| -> Vec<String> {
            self.verdicts()
                .iter()
                .enumerate()
                .filter(|(_, v)| **v == target)
                .map(|(k, _)| (k + 1).to_string())
                .collect()
        };
        let mut parts = Vec::new();
        let holds = group(Verdict::Holds);
        if !holds.is_empty() {
            let noun = if holds.len() == 1 { "condition" } else { "conditions" };
            let verb = if holds.len() == 1 { "holds" } else { "hold" };
            parts.push(format!("{noun} {} {verb}", holds.join(",")));
        }
        let fails = group(Verdict::Fails);
        if !fails.is_empty() {
            parts.push(format!("{} infeasible", fails.join(",")));
        }
        let unknown = group(Verdict::Unknown);
        if !unknown.is_empty() {
            parts.push(format!("{} unknown", unknown.join(",")));
        }
        if self.mode == KypMode::NonStrict {
            let pair = match self.time_domain {
                TimeDomain::Continuous => "(−A,B) not stabilizable",
                TimeDomain::Discrete => "(A,B) not anti-stabilizable",
            };
            if !self.stabilizable {
                parts.push(pair.to_string());
                parts.push("theorem hypotheses unmet".to_string());
            }
        }
        parts.join("; ")
    }
}

/// Evaluates all four conditions directly in the instance's time domain.
pub fn kyp_report(inst: &KypInstance, mode: KypMode, grid: &[f64]) -> Result<KypReport> {
    let frequency_check = kyp_frequency(inst, grid, mode)?;
    let static_check = kyp_static(inst, mode)?;
    let diag = kyp_diagonal_p(inst, mode)?;
    let witness = kyp_lp_certificate(inst, mode)?;
    let stabilizable = inst.is_stabilizable();
    Ok(KypReport {
        mode,
        time_domain: inst.time_domain,
        frequency: Verdict::from_bool(frequency_check.holds),
        zero_frequency: Verdict::from_bool(static_check.holds),
        diagonal_p: diag.verdict,
        linear: Verdict::from_bool(witness.is_some()),
        frequency_check,
        static_check,
        diagonal_lambda_max: diag.lambda_max,
        p_diag: (diag.verdict == Verdict::Holds).then_some(diag.p_diag),
        linear_witness: witness,
        stabilizable,
        hypotheses_met: mode == KypMode::Strict || stabilizable,
    })
}

/// Evaluates a discrete instance through its continuous-time image and
/// maps the witnesses back.
pub fn kyp_report_bilinear(inst: &KypInstance, mode: KypMode, grid: &[f64]) -> Result<KypReport> {
    let tf = bilinear_transform(inst)?;
    let mut report = kyp_report(&tf.continuous, mode, grid)?;
    report.time_domain = TimeDomain::Discrete;
    report.p_diag = report.p_diag.map(|p| tf.p_back(&p));
    report.linear_witness = report.linear_witness.map(|w| tf.witness_back(&w));
    report.stabilizable = inst.is_stabilizable();
    report.hypotheses_met = mode == KypMode::Strict || report.stabilizable;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unstabilizable() -> KypInstance {
        KypInstance::continuous(
            Matrix::from_rows(&[[-1.0]]),
            Matrix::from_rows(&[[0.0]]),
            Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]),
        )
        .unwrap()
    }

    fn scalar_gain(gamma: f64) -> KypInstance {
        KypInstance::continuous(
            Matrix::from_rows(&[[-1.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[1.0, 0.0], [0.0, -gamma * gamma]]),
        )
        .unwrap()
    }

    #[test]
    fn unstabilizable_split() {
        let inst = unstabilizable();
        let r = kyp_report(&inst, KypMode::NonStrict, &default_grid(TimeDomain::Continuous, DEFAULT_GRID)).unwrap();
        assert_eq!(r.verdicts(), [Verdict::Holds, Verdict::Holds, Verdict::Fails, Verdict::Holds]);
        assert!(!r.stabilizable);
        assert!(!r.hypotheses_met);
        assert!(r.summary().starts_with("conditions 1,2,4 hold; 3 infeasible; (−A,B) not stabilizable"));
        assert_eq!(r.static_check.lambda_max, 0.0);
    }

    #[test]
    fn unstabilizable_strict_all_fail() {
        let r = kyp_report(&unstabilizable(), KypMode::Strict, &default_grid(TimeDomain::Continuous, 50)).unwrap();
        assert_eq!(r.verdicts(), [Verdict::Fails; 4]);
    }

    #[test]
    fn trivial_static_value() {
        let inst = KypInstance::continuous(
            Matrix::from_rows(&[[-1.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[0.0, 0.0], [0.0, -1.0]]),
        )
        .unwrap();
        let c = kyp_static(&inst, KypMode::NonStrict).unwrap();
        assert!((c.lambda_max + 1.0).abs() < 1e-14 && c.holds);
        let w = LinearWitness { x: vec![1.0], u: vec![1.0], p: vec![1.0] };
        assert!(linear_residuals(&inst, &w).unwrap().iter().all(|r| *r <= 0.0));
    }

    #[test]
    fn gain_bound_by_frequency() {
        let grid = default_grid(TimeDomain::Continuous, DEFAULT_GRID);
        let ok = kyp_frequency(&scalar_gain(2.0), &grid, KypMode::NonStrict).unwrap();
        assert!(ok.holds);
        assert!((ok.lambda_max + 3.0).abs() < 1e-12 && ok.omega == 0.0);
        let bad = kyp_frequency(&scalar_gain(0.5), &grid, KypMode::NonStrict).unwrap();
        assert!(!bad.holds && bad.omega == 0.0);
        assert!((bad.lambda_max - 0.75).abs() < 1e-12);
    }

    #[test]
    fn diagonal_p_for_gain_two() {
        let inst = scalar_gain(2.0);
        // [[1 − 2p, p], [p, −4]] is NSD exactly for p ∈ [4 − 2√3, 4 + 2√3].
        let lam = |p: f64| linalg::lambda_max(&inst.lyapunov_matrix(&[p]).unwrap()).unwrap();
        assert!(lam(0.5) > 0.0);
        assert!(lam(1.0) < 0.0);
        assert!(lam(4.0 - 12f64.sqrt()).abs() < 1e-9);
        let d = kyp_diagonal_p(&inst, KypMode::Strict).unwrap();
        assert_eq!(d.verdict, Verdict::Holds);
        assert!(lam(d.p_diag[0]) < -STRICT_MARGIN);
        assert!(d.p_diag[0] > 4.0 - 12f64.sqrt() && d.p_diag[0] < 4.0 + 12f64.sqrt());
    }

    #[test]
    fn nsd_weight_needs_no_p() {
        let inst = KypInstance::continuous(
            Matrix::from_rows(&[[-1.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[0.0, 0.0], [0.0, -1.0]]),
        )
        .unwrap();
        let d = kyp_diagonal_p(&inst, KypMode::NonStrict).unwrap();
        assert_eq!(d.verdict, Verdict::Holds);
        assert_eq!(d.p_diag, vec![0.0]);
    }

    #[test]
    fn trivial_u_zero_solution_excluded() {
        // Static form −1/1·… : [1;1]ᵀ diag(0,1) [1;1] = 1 > 0, yet x = 1,
        // u = 0, p = 0 satisfies the rows.
        let inst = KypInstance::continuous(
            Matrix::from_rows(&[[-1.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0]]),
        )
        .unwrap();
        let w = LinearWitness { x: vec![1.0], u: vec![0.0], p: vec![0.0] };
        assert!(linear_residuals(&inst, &w).unwrap().iter().all(|r| *r <= 0.0));
        assert!(!kyp_static(&inst, KypMode::NonStrict).unwrap().holds);
        assert!(kyp_lp_certificate(&inst, KypMode::NonStrict).unwrap().is_none());
    }

    #[test]
    fn bilinear_formulas() {
        let inst = KypInstance::discrete(
            Matrix::from_rows(&[[0.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[1.0, 0.0], [0.0, -4.0]]),
        )
        .unwrap();
        let tf = bilinear_transform(&inst).unwrap();
        assert_eq!(tf.continuous.a[(0, 0)], -1.0);
        assert_eq!(tf.continuous.b[(0, 0)], 2.0);

        let inst = KypInstance::discrete(
            Matrix::from_diag(&[0.5, 0.2]),
            Matrix::from_rows(&[[1.0], [1.0]]),
            Matrix::from_diag(&[1.0, 1.0, -9.0]),
        )
        .unwrap();
        let a_hat = bilinear_transform(&inst).unwrap().continuous.a;
        assert!((a_hat[(0, 0)] + 1.0 / 3.0).abs() < 1e-15);
        assert!((a_hat[(1, 1)] + 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(a_hat[(0, 1)], 0.0);
    }

    #[test]
    fn bilinear_back_maps_witnesses() {
        let inst = KypInstance::discrete(
            Matrix::from_rows(&[[0.3, 0.1], [0.2, 0.4]]),
            Matrix::from_rows(&[[1.0], [0.5]]),
            Matrix::from_rows(&[[1.0, 0.2, 0.0], [0.2, 0.5, 0.1], [0.0, 0.1, -30.0]]),
        )
        .unwrap();
        let grid = default_grid(TimeDomain::Continuous, 100);
        let via = kyp_report_bilinear(&inst, KypMode::Strict, &grid).unwrap();
        let direct = kyp_report(&inst, KypMode::Strict, &default_grid(TimeDomain::Discrete, 100)).unwrap();
        assert_eq!(via.verdicts(), direct.verdicts());
        assert_eq!(via.verdicts(), [Verdict::Holds; 4]);
        let p = via.p_diag.unwrap();
        assert!(linalg::lambda_max(&inst.lyapunov_matrix(&p).unwrap()).unwrap() < 0.0);
        let w = via.linear_witness.unwrap();
        assert!(w.x.iter().all(|v| *v >= 0.0));
        assert!(linear_residuals(&inst, &w).unwrap().iter().all(|r| *r < 0.0));
        // Static forms coincide: zero frequency maps to z = 1.
        let s1 = kyp_static(&inst, KypMode::Strict).unwrap().lambda_max;
        let s2 = kyp_static(&bilinear_transform(&inst).unwrap().continuous, KypMode::Strict).unwrap().lambda_max;
        assert!((s1 - s2).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_sign_pattern() {
        let q = Matrix::from_rows(&[[-1.0, 0.0], [0.0, -1.0]]);
        let r = KypInstance::continuous(Matrix::from_rows(&[[-1.0]]), Matrix::from_rows(&[[1.0]]), q);
        assert!(matches!(r, Err(Error::NegativeEntry { .. })));
        let r = KypInstance::continuous(
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_diag(&[0.0, -1.0]),
        );
        assert!(matches!(r, Err(Error::Unstable(_))));
    }
}
