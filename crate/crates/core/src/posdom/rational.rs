//! Scalar rational functions and matrices of them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Matrix};

/// Common roots closer than this (relative) are cancelled.
pub const GCD_TOL: f64 = 1e-8;
/// Poles this close to the imaginary axis make a function marginal.
pub const AXIS_TOL: f64 = 1e-9;
const CLEAN_TOL: f64 = 1e-13;
/// Relative tolerance on the sign of the dominance polynomial.
pub const DOMINANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TfStability {
    Stable,
    Unstable,
    Marginal,
}

/// `num(s) / den(s)` with a monic denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RationalRepr", into = "RationalRepr")]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl TryFrom<RationalRepr> for RationalFunction {
    type Error = Error;

    fn try_from(r: RationalRepr) -> Result<Self> {
        Self::new(r.num, r.den)
    }
}

impl From<RationalFunction> for RationalRepr {
    fn from(f: RationalFunction) -> Self {
        Self { num: f.num.coeffs().to_vec(), den: f.den.coeffs().to_vec() }
    }
}

impl RationalFunction {
    /// From ascending coefficient lists; reduced and normalized.
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if num.iter().chain(&den).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("rational function coefficients".into()));
        }
        Self::from_polys(Poly::new(num), Poly::new(den))
    }

    pub fn from_polys(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidArgument("denominator is identically zero".into()));
        }
        let lead = den.leading();
        let mut f = Self { num: num.scale(1.0 / lead), den: den.scale(1.0 / lead) };
        f.reduce();
        Ok(f)
    }

    pub fn constant(c: f64) -> Self {
        Self { num: Poly::constant(c), den: Poly::constant(1.0) }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `gain / (s + pole)`.
    pub fn first_order(gain: f64, pole: f64) -> Self {
        Self { num: Poly::constant(gain), den: Poly::new(vec![pole, 1.0]) }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Cancels numerator/denominator roots that agree within [`GCD_TOL`].
    /// Without matches the coefficients are left untouched.
    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::constant(1.0);
            return;
        }
        if self.den.degree() == Some(0) || self.num.degree() == Some(0) {
            return;
        }
        let zeros = self.num.roots();
        let mut poles = self.den.roots();
        let mut kept_zeros = Vec::with_capacity(zeros.len());
        let mut cancelled = 0;
        for z in zeros {
            let hit = poles
                .iter()
                .enumerate()
                .filter(|(_, p)| (z - **p).norm() <= GCD_TOL * z.norm().max(1.0))
                .min_by(|a, b| (z - *a.1).norm().total_cmp(&(z - *b.1).norm()))
                .map(|(i, _)| i);
            match hit {
                Some(i) => {
                    poles.swap_remove(i);
                    cancelled += 1;
                }
                None => kept_zeros.push(z),
            }
        }
        if cancelled == 0 {
            return;
        }
        let lead = self.num.leading();
        self.num = Poly::from_roots(&kept_zeros, lead);
        self.den = Poly::from_roots(&poles, 1.0);
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    pub fn at_frequency(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, omega))
    }

    /// `G(0)`; errors when the denominator vanishes at the origin.
    pub fn dc_gain(&self) -> Result<f64> {
        let d0 = self.den.coeff(0);
        if d0 == 0.0 {
            return Err(Error::InvalidArgument("G(0) is undefined: denominator vanishes at s = 0".into()));
        }
        Ok(self.num.coeff(0) / d0)
    }

    pub fn stability(&self) -> TfStability {
        if self.den.degree().unwrap_or(0) == 0 {
            return TfStability::Stable;
        }
        let max_re = self.den.roots().iter().fold(f64::NEG_INFINITY, |m, r| m.max(r.re));
        if max_re.abs() <= AXIS_TOL {
            return TfStability::Marginal;
        }
        match self.den.routh_hurwitz() {
            Some(true) => TfStability::Stable,
            Some(false) => TfStability::Unstable,
            None => TfStability::Marginal,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        if self.den == other.den {
            return Self::from_polys(self.num.add(&other.num), self.den.clone()).expect("nonzero denominator");
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        Self::from_polys(num, self.den.mul(&other.den)).expect("nonzero denominator")
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        Self::from_polys(self.num.mul(&other.num), self.den.mul(&other.den)).expect("nonzero denominator")
    }

    pub fn scale(&self, a: f64) -> Self {
        if a == 0.0 {
            return Self::zero();
        }
        Self { num: self.num.scale(a), den: self.den.clone() }
    }

    /// `h(t) = |den(iω)|²·num(0)² − |num(iω)|²·den(0)²` in `t = ω²`.
    /// Nonnegative on `t ≥ 0` iff `|G(iω)| ≤ |G(0)|` everywhere.
    pub fn dominance_polynomial(&self) -> Poly {
        let n0 = self.num.coeff(0);
        let d0 = self.den.coeff(0);
        let h = self
            .den
            .modulus_squared_on_axis()
            .scale(n0 * n0)
            .sub(&self.num.modulus_squared_on_axis().scale(d0 * d0));
        h.cleaned(CLEAN_TOL)
    }

    /// Exact dominance test `|G(iω)| ≤ G(0)` for all real `ω`.
    pub fn is_positively_dominated(&self) -> Result<bool> {
        Ok(self.dominance_witness()?.is_none())
    }

    /// A frequency where `|G(iω)| > G(0)`, or `None` if the function is
    /// positively dominated. `Some(0.0)` flags a negative static gain.
    pub fn dominance_witness(&self) -> Result<Option<f64>> {
        let g0 = self.dc_gain()?;
        match self.stability() {
            TfStability::Stable => {}
            TfStability::Unstable => return Err(Error::Unstable("rational function has unstable poles".into())),
            TfStability::Marginal => {
                return Err(Error::Unstable("rational function has poles on the imaginary axis".into()))
            }
        }
        if self.is_zero() {
            return Ok(None);
        }
        if g0 < 0.0 {
            return Ok(Some(0.0));
        }
        let h = self.dominance_polynomial();
        if h.is_zero() {
            return Ok(None);
        }
        // h(0) = 0 always; divide out powers of t.
        let lowest = h.coeffs().iter().position(|&c| c != 0.0).unwrap_or(0);
        let reduced = Poly::new(h.coeffs()[lowest..].to_vec());
        let roots = reduced.positive_roots();
        let mut samples = Vec::with_capacity(roots.len() + 1);
        match (roots.first(), roots.last()) {
            (Some(&first), Some(&last)) => {
                samples.push(0.5 * first);
                samples.extend(roots.windows(2).map(|w| 0.5 * (w[0] + w[1])));
                samples.push(2.0 * last + 1.0);
            }
            _ => samples.push(1.0),
        }
        Ok(samples
            .into_iter()
            .find(|&t| reduced.eval(t) < -DOMINANCE_TOL * reduced.eval_abs(t))
            .map(f64::sqrt))
    }
}

/// Rows × cols grid of rational functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<RationalFunction>>", into = "Vec<Vec<RationalFunction>>")]
pub struct RationalTransferMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<RationalFunction>,
}

impl TryFrom<Vec<Vec<RationalFunction>>> for RationalTransferMatrix {
    type Error = Error;

    fn try_from(grid: Vec<Vec<RationalFunction>>) -> Result<Self> {
        let rows = grid.len();
        let cols = grid.first().map_or(0, |r| r.len());
        if grid.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged transfer matrix".into()));
        }
        Ok(Self { rows, cols, entries: grid.into_iter().flatten().collect() })
    }
}

impl From<RationalTransferMatrix> for Vec<Vec<RationalFunction>> {
    fn from(m: RationalTransferMatrix) -> Self {
        (0..m.rows).map(|i| m.entries[i * m.cols..(i + 1) * m.cols].to_vec()).collect()
    }
}

impl RationalTransferMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> RationalFunction) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| RationalFunction::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| RationalFunction::constant(if i == j { 1.0 } else { 0.0 }))
    }

    /// Constant transfer matrix.
    pub fn from_matrix(m: &Matrix) -> Self {
        Self::from_fn(m.rows(), m.cols(), |i, j| RationalFunction::constant(m[(i, j)]))
    }

    pub fn scalar(f: RationalFunction) -> Self {
        Self { rows: 1, cols: 1, entries: vec![f] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &RationalFunction {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: RationalFunction) {
        self.entries[i * self.cols + j] = f;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &RationalFunction)> {
        self.entries.iter().enumerate().map(move |(k, f)| (k / self.cols, k % self.cols, f))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Entrywise `G(0)`.
    pub fn dc_gain(&self) -> Result<Matrix> {
        let mut out = Matrix::zeros(self.rows, self.cols);
        for (i, j, f) in self.entries() {
            out[(i, j)] = f.dc_gain()?;
        }
        Ok(out)
    }

    pub fn eval(&self, s: Complex64) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for (i, j, f) in self.entries() {
            out.set(i, j, f.eval(s));
        }
        out
    }

    pub fn at_frequency(&self, omega: f64) -> CMatrix {
        self.eval(Complex64::new(0.0, omega))
    }

    pub fn is_stable(&self) -> bool {
        self.entries.iter().all(|f| f.stability() == TfStability::Stable)
    }
}

/// Every entry positively dominated.
pub fn matrix_dominated(g: &RationalTransferMatrix) -> Result<bool> {
    for (_, _, f) in g.entries() {
        if !f.is_positively_dominated()? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First non-dominated entry with a violating frequency.
pub fn matrix_dominance_witness(g: &RationalTransferMatrix) -> Result<Option<(usize, usize, f64)>> {
    for (i, j, f) in g.entries() {
        if let Some(w) = f.dominance_witness()? {
            return Ok(Some((i, j, w)));
        }
    }
    Ok(None)
}

/// Entrywise sum.
pub fn tf_add(g: &RationalTransferMatrix, h: &RationalTransferMatrix) -> Result<RationalTransferMatrix> {
    if g.shape() != h.shape() {
        return Err(Error::DimensionMismatch(format!(
            "adding {}x{} and {}x{}",
            g.rows, g.cols, h.rows, h.cols
        )));
    }
    Ok(RationalTransferMatrix::from_fn(g.rows, g.cols, |i, j| g.get(i, j).add(h.get(i, j))))
}

/// Conic combination `a·G + b·H`.
pub fn tf_combine(a: f64, g: &RationalTransferMatrix, b: f64, h: &RationalTransferMatrix) -> Result<RationalTransferMatrix> {
    if g.shape() != h.shape() {
        return Err(Error::DimensionMismatch("combining transfer matrices of different shapes".into()));
    }
    Ok(RationalTransferMatrix::from_fn(g.rows, g.cols, |i, j| g.get(i, j).scale(a).add(&h.get(i, j).scale(b))))
}

/// Matrix product.
pub fn tf_mul(g: &RationalTransferMatrix, h: &RationalTransferMatrix) -> Result<RationalTransferMatrix> {
    if g.cols != h.rows {
        return Err(Error::DimensionMismatch(format!(
            "multiplying {}x{} by {}x{}",
            g.rows, g.cols, h.rows, h.cols
        )));
    }
    Ok(RationalTransferMatrix::from_fn(g.rows, h.cols, |i, j| {
        (0..g.cols).fold(RationalFunction::zero(), |acc, k| acc.add(&g.get(i, k).mul(h.get(k, j))))
    }))
}

/// `‖G‖∞ = σ_max(G(0))` for a positively dominated `G`.
pub fn hinf_norm_dominated(g: &RationalTransferMatrix) -> Result<f64> {
    if !matrix_dominated(g)? {
        return Err(Error::Hypothesis("transfer matrix is not positively dominated".into()));
    }
    let g0 = g.dc_gain()?;
    if g0.rows() == 0 || g0.cols() == 0 {
        return Ok(0.0);
    }
    Ok(linalg::lambda_max(&g0.transpose().checked_mul(&g0)?.symmetrize())?.max(0.0).sqrt())
}

/// Well-posedness of `(I − G)⁻¹` within the dominated class: `G(0)` Schur.
pub fn feedback_wellposed(g: &RationalTransferMatrix) -> Result<bool> {
    if g.rows != g.cols {
        return Err(Error::NotSquare { rows: g.rows, cols: g.cols });
    }
    if !matrix_dominated(g)? {
        return Err(Error::Hypothesis("transfer matrix is not positively dominated".into()));
    }
    Ok(linalg::spectral_radius(&g.dc_gain()?)? < 1.0)
}

/// The loop `(I − G)⁻¹` of a dominated `G` with Schur static gain.
#[derive(Debug, Clone)]
pub struct FeedbackLoop {
    g: RationalTransferMatrix,
}

impl FeedbackLoop {
    pub fn new(g: RationalTransferMatrix) -> Result<Self> {
        if !feedback_wellposed(&g)? {
            return Err(Error::Hypothesis("G(0) is not Schur; (I − G)⁻¹ is not positively dominated".into()));
        }
        Ok(Self { g })
    }

    /// `(I − G(iω))⁻¹`.
    pub fn response(&self, omega: f64) -> Result<CMatrix> {
        let n = self.g.rows();
        let gw = self.g.at_frequency(omega);
        let mut m = CMatrix::zeros(n, n);
        let mut id = CMatrix::zeros(n, n);
        for i in 0..n {
            id.set(i, i, Complex64::new(1.0, 0.0));
            for j in 0..n {
                let d = if i == j { 1.0 } else { 0.0 };
                m.set(i, j, Complex64::new(d, 0.0) - gw.get(i, j));
            }
        }
        m.solve(&id)
    }

    /// `(I − G(0))⁻¹`, entrywise nonnegative.
    pub fn dc_gain(&self) -> Result<Matrix> {
        let n = self.g.rows();
        (&Matrix::identity(n) - &self.g.dc_gain()?).inverse()
    }
}
