//! Induced norms from the static gain and LP performance certificates.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, resolvent_times, CMatrix, Matrix};
use crate::lp::{LinearProgram, LpStatus};
use crate::stability::TimeDomain;

/// Positive linear system `(A, B, C, D)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveStateSpace {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    #[serde(default)]
    pub time_domain: TimeDomain,
}

impl PositiveStateSpace {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix, time_domain: TimeDomain) -> Result<Self> {
        let sys = Self { a, b, c, d, time_domain };
        sys.validate()?;
        Ok(sys)
    }

    pub fn continuous(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        Self::new(a, b, c, d, TimeDomain::Continuous)
    }

    pub fn discrete(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        Self::new(a, b, c, d, TimeDomain::Discrete)
    }

    /// Scalar continuous system.
    pub fn scalar(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let m = |v: f64| Matrix::from_rows(&[[v]]);
        Self::continuous(m(a), m(b), m(c), m(d))
    }

    pub fn validate(&self) -> Result<()> {
        self.check_dimensions()?;
        match self.time_domain {
            TimeDomain::Continuous => self.a.require_metzler(0.0)?,
            TimeDomain::Discrete => self.a.require_nonnegative(0.0)?,
        }
        self.b.require_nonnegative(0.0)?;
        self.c.require_nonnegative(0.0)?;
        self.d.require_nonnegative(0.0)?;
        Ok(())
    }

    pub fn check_dimensions(&self) -> Result<()> {
        self.a.require_square()?;
        let n = self.a.rows();
        let (bn, m) = self.b.shape();
        let (p, cn) = self.c.shape();
        if bn != n || cn != n || self.d.shape() != (p, m) {
            return Err(Error::DimensionMismatch(format!(
                "A {n}x{n}, B {bn}x{m}, C {p}x{cn}, D {}x{}",
                self.d.rows(),
                self.d.cols()
            )));
        }
        Ok(())
    }

    pub fn states(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn outputs(&self) -> usize {
        self.c.rows()
    }

    pub fn is_scalar(&self) -> bool {
        self.inputs() == 1 && self.outputs() == 1
    }

    /// Spectral abscissa (continuous) or spectral radius (discrete) of `A`.
    pub fn spectral_value(&self) -> Result<f64> {
        match self.time_domain {
            TimeDomain::Continuous => linalg::spectral_abscissa(&self.a),
            TimeDomain::Discrete => linalg::spectral_radius(&self.a),
        }
    }

    pub fn is_stable(&self) -> Result<bool> {
        let v = self.spectral_value()?;
        Ok(match self.time_domain {
            TimeDomain::Continuous => v < 0.0,
            TimeDomain::Discrete => v < 1.0,
        })
    }

    fn require_stable(&self) -> Result<()> {
        if self.is_stable()? {
            Ok(())
        } else {
            let what = match self.time_domain {
                TimeDomain::Continuous => "A is not Hurwitz",
                TimeDomain::Discrete => "A is not Schur",
            };
            Err(Error::Unstable(format!("{what} (spectral value {})", self.spectral_value()?)))
        }
    }

    /// Transfer matrix at `s = iω` (continuous) or `z = e^{iω}` (discrete).
    /// `ω = ∞` evaluates the continuous limit `D`.
    pub fn frequency_response(&self, omega: f64) -> Result<CMatrix> {
        if omega.is_infinite() && self.time_domain == TimeDomain::Continuous {
            return Ok(CMatrix::from_real(&self.d));
        }
        let z = match self.time_domain {
            TimeDomain::Continuous => Complex64::new(0.0, omega),
            TimeDomain::Discrete => Complex64::from_polar(1.0, omega),
        };
        let x = resolvent_times(&self.a, &self.b, z)?;
        let mut g = CMatrix::from_real(&self.c).mul(&x)?;
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let v = g.get(i, j) + self.d[(i, j)];
                g.set(i, j, v);
            }
        }
        Ok(g)
    }
}

/// `D - CA⁻¹B` (continuous) or `D + C(I - A)⁻¹B` (discrete).
pub fn static_gain(sys: &PositiveStateSpace) -> Result<Matrix> {
    sys.check_dimensions()?;
    sys.require_stable()?;
    Ok(static_gain_unchecked(sys)?.map(|v| v.max(0.0)))
}

fn static_gain_unchecked(sys: &PositiveStateSpace) -> Result<Matrix> {
    let n = sys.states();
    let resolvent = match sys.time_domain {
        TimeDomain::Continuous => sys.a.scale(-1.0),
        TimeDomain::Discrete => &Matrix::identity(n) - &sys.a,
    };
    let x = resolvent.solve_matrix(&sys.b)?;
    sys.c.checked_mul(&x)?.checked_add(&sys.d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Self::One),
            "2" => Ok(Self::Two),
            "inf" | "∞" | "Inf" | "INF" => Ok(Self::Inf),
            other => Err(Error::InvalidArgument(format!("unsupported norm `{other}`; use 1, 2 or inf"))),
        }
    }
}

/// Norm of a nonnegative gain matrix induced by `p`.
pub fn gain_norm(g: &Matrix, kind: NormKind) -> Result<f64> {
    Ok(match kind {
        NormKind::One => g.norm_1(),
        NormKind::Inf => g.norm_inf(),
        NormKind::Two => {
            if g.rows() == 0 || g.cols() == 0 {
                return Ok(0.0);
            }
            let gtg = g.transpose().checked_mul(g)?.symmetrize();
            linalg::lambda_max(&gtg)?.max(0.0).sqrt()
        }
    })
}

/// Induced norm of a stable positive system, read off its static gain.
pub fn induced_norm(sys: &PositiveStateSpace, kind: NormKind) -> Result<f64> {
    let g = static_gain(sys)?;
    if sys.is_scalar() {
        return Ok(g[(0, 0)]);
    }
    gain_norm(&g, kind)
}

/// Induced norm for a numeric exponent. Scalar systems accept any
/// `p ∈ [1, ∞]`; matrix systems only `1`, `2` and `∞`.
pub fn induced_norm_p(sys: &PositiveStateSpace, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p must be at least 1, got {p}")));
    }
    if sys.is_scalar() {
        return Ok(static_gain(sys)?[(0, 0)]);
    }
    let kind = if p == 1.0 {
        NormKind::One
    } else if p == 2.0 {
        NormKind::Two
    } else if p.is_infinite() {
        NormKind::Inf
    } else {
        return Err(Error::InvalidArgument(format!(
            "induced {p}-norm of a matrix system is not supported; use 1, 2 or inf"
        )));
    };
    induced_norm(sys, kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// ∞-induced bound, certified by a state bound `ξ`.
    Linf,
    /// 1-induced bound, certified by a cost vector `p`.
    L1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceCertificate {
    pub direction: Direction,
    pub vector: Vec<f64>,
    pub gamma: f64,
    pub margin: f64,
}

/// `ξ ≥ 0` with `Aξ + B𝟏 < 0` (or `< ξ`) and `Cξ + D𝟏 < γ𝟏`.
pub fn linf_certificate(sys: &PositiveStateSpace, gamma: f64) -> Result<Option<PerformanceCertificate>> {
    sys.validate()?;
    certificate(&sys.a, &sys.b, &sys.c, &sys.d, sys.time_domain, gamma, Direction::Linf)
}

/// `p ≥ 0` with `Aᵀp + Cᵀ𝟏 < 0` (or `< p`) and `Bᵀp + Dᵀ𝟏 < γ𝟏`.
pub fn l1_certificate(sys: &PositiveStateSpace, gamma: f64) -> Result<Option<PerformanceCertificate>> {
    sys.validate()?;
    certificate(
        &sys.a.transpose(),
        &sys.c.transpose(),
        &sys.b.transpose(),
        &sys.d.transpose(),
        sys.time_domain,
        gamma,
        Direction::L1,
    )
}

fn certificate(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    d: &Matrix,
    domain: TimeDomain,
    gamma: f64,
    direction: Direction,
) -> Result<Option<PerformanceCertificate>> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("γ must be positive and finite, got {gamma}")));
    }
    let lp = performance_lp(a, b, c, d, domain, gamma);
    let out = lp.feasibility_with_margin()?;
    Ok(match out.status {
        LpStatus::Optimal => Some(PerformanceCertificate { direction, vector: out.y, gamma, margin: out.margin }),
        _ => None,
    })
}

fn performance_lp(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix, domain: TimeDomain, gamma: f64) -> LinearProgram {
    let n = a.rows();
    let b1: Vec<f64> = (0..b.rows()).map(|i| b.row(i).iter().sum()).collect();
    let d1: Vec<f64> = (0..d.rows()).map(|i| d.row(i).iter().sum()).collect();
    let mut lp = LinearProgram::new(n);
    for i in 0..n {
        let mut row = a.row(i).to_vec();
        if domain == TimeDomain::Discrete {
            row[i] -= 1.0;
        }
        lp.add_lt(&row, -b1[i]);
    }
    for j in 0..c.rows() {
        lp.add_lt(c.row(j), gamma - d1[j]);
    }
    lp
}

/// Checks `Aξ + B𝟏 < 0` (resp. `< ξ`) and `Cξ + D𝟏 < γ` row by row and
/// returns the smallest slack.
pub fn linf_slack(sys: &PositiveStateSpace, xi: &[f64], gamma: f64) -> Result<f64> {
    sys.check_dimensions()?;
    let lp = performance_lp(&sys.a, &sys.b, &sys.c, &sys.d, sys.time_domain, gamma);
    certificate_slack(&lp, xi)
}

/// Mirror of [`linf_slack`] for a 1-induced certificate `p`.
pub fn l1_slack(sys: &PositiveStateSpace, p: &[f64], gamma: f64) -> Result<f64> {
    sys.check_dimensions()?;
    let lp = performance_lp(
        &sys.a.transpose(),
        &sys.c.transpose(),
        &sys.b.transpose(),
        &sys.d.transpose(),
        sys.time_domain,
        gamma,
    );
    certificate_slack(&lp, p)
}

fn certificate_slack(lp: &LinearProgram, v: &[f64]) -> Result<f64> {
    if v.len() != lp.num_vars() {
        return Err(Error::DimensionMismatch(format!("vector has {} entries, expected {}", v.len(), lp.num_vars())));
    }
    let neg = v.iter().fold(0.0_f64, |m, x| m.min(*x));
    Ok(lp.strict_margin(v).min(if neg < 0.0 { neg } else { f64::INFINITY }))
}

/// Default Euler step `0.1 / max|a_ii|` (0.1 when the diagonal vanishes).
pub fn default_step(a: &Matrix) -> f64 {
    let m = a.diag().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m > 0.0 {
        0.1 / m
    } else {
        0.1
    }
}

/// Simulates `x(0) = 0` under a given disturbance and reports whether
/// `|x(t)| < ξ` held throughout. Continuous systems use forward Euler with
/// step `h` (requires `h·max|a_ii| ≤ 1` so that `I + hA ≥ 0`); discrete
/// systems iterate `horizon` steps and ignore `h`.
pub fn simulate_state_bound(
    sys: &PositiveStateSpace,
    xi: &[f64],
    horizon: f64,
    step: Option<f64>,
    disturbance: &mut dyn FnMut(f64) -> Vec<f64>,
) -> Result<bool> {
    sys.check_dimensions()?;
    let n = sys.states();
    if xi.len() != n {
        return Err(Error::DimensionMismatch(format!("ξ has {} entries, expected {n}", xi.len())));
    }
    let (h, iterations, euler) = match sys.time_domain {
        TimeDomain::Continuous => {
            let h = step.unwrap_or_else(|| default_step(&sys.a));
            let amax = sys.a.diag().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if !(h > 0.0) || h * amax > 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "Euler step {h} exceeds the positivity limit {}",
                    if amax > 0.0 { 1.0 / amax } else { f64::INFINITY }
                )));
            }
            (h, (horizon / h).ceil() as usize, true)
        }
        TimeDomain::Discrete => (1.0, horizon.max(0.0) as usize, false),
    };
    let mut x = vec![0.0; n];
    for k in 0..iterations {
        let t = k as f64 * h;
        let w = disturbance(t);
        if w.len() != sys.inputs() {
            return Err(Error::DimensionMismatch(format!("disturbance has {} entries", w.len())));
        }
        let ax = sys.a.mul_vec(&x);
        let bw = sys.b.mul_vec(&w);
        x = if euler {
            (0..n).map(|i| x[i] + h * (ax[i] + bw[i])).collect()
        } else {
            (0..n).map(|i| ax[i] + bw[i]).collect()
        };
        if x.iter().zip(xi).any(|(xv, bound)| xv.abs() >= *bound) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs the state-bound check for `w ≡ 𝟏`, `w ≡ -𝟏` and `random_trials`
/// random sign-switching disturbances with `‖w‖∞ ≤ 1`.
pub fn state_bound_simulation(
    sys: &PositiveStateSpace,
    xi: &[f64],
    horizon: f64,
    step: Option<f64>,
    random_trials: usize,
    seed: u64,
) -> Result<bool> {
    let m = sys.inputs();
    for sign in [1.0, -1.0] {
        if !simulate_state_bound(sys, xi, horizon, step, &mut |_| vec![sign; m])? {
            return Ok(false);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random_trials {
        let mut current: Vec<f64> = (0..m).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let mut trial_rng = ChaCha8Rng::seed_from_u64(rng.gen());
        let ok = simulate_state_bound(sys, xi, horizon, step, &mut |_| {
            for w in current.iter_mut() {
                if trial_rng.gen_bool(0.05) {
                    *w = -*w;
                }
            }
            current.iter().map(|w| w * trial_rng.gen_range(0.5..=1.0)).collect()
        })?;
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
