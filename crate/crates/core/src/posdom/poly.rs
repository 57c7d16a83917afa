//! Real polynomials in ascending-coefficient form.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ROOT_MAX_ITERS: usize = 500;

#[derive(Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// From ascending coefficients; trailing zeros are dropped.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has none.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Zeroes coefficients below `rel · max|c|` and trims.
    pub fn cleaned(&self, rel: f64) -> Self {
        let thresh = rel * self.max_abs_coeff();
        Self::new(self.coeffs.iter().map(|&c| if c.abs() <= thresh { 0.0 } else { c }).collect())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `Σ |c_k| x^k`, the natural scale for rounding error in `eval(x)`.
    pub fn eval_abs(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Poly) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Poly) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }

    /// `p(-s)`.
    pub fn reflect(&self) -> Self {
        Self::new(
            self.coeffs.iter().enumerate().map(|(k, &c)| if k % 2 == 1 { -c } else { c }).collect(),
        )
    }

    /// `|p(iω)|²` as a polynomial in `t = ω²`.
    pub fn modulus_squared_on_axis(&self) -> Self {
        let even = self.mul(&self.reflect());
        Self::new(
            even.coeffs
                .iter()
                .step_by(2)
                .enumerate()
                .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
                .collect(),
        )
    }

    /// Euclidean division.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        let Some(dd) = divisor.degree() else {
            return Err(Error::InvalidArgument("polynomial division by zero".into()));
        };
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else { return Ok((Poly::zero(), Poly::zero())) };
        if nd < dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![0.0; nd - dd + 1];
        let lead = divisor.leading();
        for k in (0..=nd - dd).rev() {
            let f = rem[k + dd] / lead;
            quot[k] = f;
            for (j, &c) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= f * c;
            }
            rem[k + dd] = 0.0;
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// Monic polynomial with the given roots (conjugate pairs give real
    /// coefficients), times `lead`.
    pub fn from_roots(roots: &[Complex64], lead: f64) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &v) in c.iter().enumerate() {
                next[k + 1] += v;
                next[k] -= v * r;
            }
            c = next;
        }
        Self::new(c.into_iter().map(|z| z.re * lead).collect())
    }

    /// All complex roots (Aberth–Ehrlich iteration).
    pub fn roots(&self) -> Vec<Complex64> {
        let Some(n) = self.degree() else { return Vec::new() };
        // zero roots are exact
        let lowest = self.coeffs.iter().position(|&c| c != 0.0).unwrap_or(0);
        let mut roots = vec![Complex64::new(0.0, 0.0); lowest];
        let p = Poly::new(self.coeffs[lowest..].to_vec());
        let m = n - lowest;
        match m {
            0 => {}
            1 => roots.push(Complex64::new(-p.coeffs[0] / p.coeffs[1], 0.0)),
            2 => {
                let (c, b, a) = (p.coeffs[0], p.coeffs[1], p.coeffs[2]);
                let disc = Complex64::new(b * b - 4.0 * a * c, 0.0).sqrt();
                // numerically stable pair
                let q = if b >= 0.0 { -(b + disc) / 2.0 } else { -(Complex64::new(b, 0.0) - disc) / 2.0 };
                let r1 = q / a;
                let r2 = if q.norm() > 0.0 { Complex64::new(c, 0.0) / q } else { Complex64::new(0.0, 0.0) };
                roots.push(r1);
                roots.push(r2);
            }
            _ => roots.extend(p.aberth()),
        }
        roots
    }

    fn aberth(&self) -> Vec<Complex64> {
        let n = self.degree().unwrap_or(0);
        let lead = self.leading();
        let radius = 1.0 + self.coeffs[..n].iter().fold(0.0_f64, |m, c| m.max((c / lead).abs()));
        let r0 = radius.min(
            (self.coeffs[0] / lead).abs().powf(1.0 / n as f64).max(1e-3),
        );
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(r0, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
            .collect();
        let dp = self.derivative();
        for _ in 0..ROOT_MAX_ITERS {
            let mut max_step = 0.0_f64;
            for k in 0..n {
                let pv = self.eval_complex(z[k]);
                if pv.norm() == 0.0 {
                    continue;
                }
                let ratio = pv / dp.eval_complex(z[k]);
                let s: Complex64 =
                    (0..n).filter(|&j| j != k).map(|j| Complex64::new(1.0, 0.0) / (z[k] - z[j])).sum();
                let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
                if w.is_finite() {
                    z[k] -= w;
                    max_step = max_step.max(w.norm() / z[k].norm().max(1e-300));
                }
            }
            if max_step < 1e-15 {
                break;
            }
        }
        // snap nearly real roots
        for r in z.iter_mut() {
            if r.im.abs() <= 1e-12 * r.norm().max(1.0) {
                r.im = 0.0;
            }
        }
        z
    }

    /// Routh–Hurwitz test: `Some(true)` if every root is in the open left
    /// half-plane, `Some(false)` if some root is not, `None` if a zero
    /// appears in the first column.
    pub fn routh_hurwitz(&self) -> Option<bool> {
        let n = self.degree()?;
        if n == 0 {
            return Some(true);
        }
        let sign = self.leading().signum();
        let desc: Vec<f64> = self.coeffs.iter().rev().map(|c| c * sign).collect();
        let scale = desc.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        let tol = 1e-12 * scale;
        let mut r0: Vec<f64> = desc.iter().step_by(2).copied().collect();
        let mut r1: Vec<f64> = desc.iter().skip(1).step_by(2).copied().collect();
        let width = r0.len();
        r0.resize(width, 0.0);
        r1.resize(width, 0.0);
        let mut first = vec![r0[0]];
        for _ in 0..n {
            let pivot = r1[0];
            if pivot.abs() <= tol {
                return None;
            }
            first.push(pivot);
            let mut next = vec![0.0; width];
            for j in 0..width - 1 {
                next[j] = (pivot * r0[j + 1] - r0[0] * r1[j + 1]) / pivot;
            }
            r0 = r1;
            r1 = next;
            if first.len() == n + 1 {
                break;
            }
        }
        Some(first.iter().all(|&v| v > 0.0))
    }

    /// Sturm sequence `p, p', -rem(...)`, each normalized to unit max
    /// coefficient.
    pub fn sturm_sequence(&self) -> Vec<Poly> {
        let mut seq = Vec::new();
        if self.is_zero() {
            return seq;
        }
        let norm = |p: Poly| {
            let m = p.max_abs_coeff();
            if m > 0.0 {
                p.scale(1.0 / m)
            } else {
                p
            }
        };
        seq.push(norm(self.clone()));
        let d = self.derivative();
        if d.is_zero() {
            return seq;
        }
        seq.push(norm(d));
        loop {
            let k = seq.len();
            let (_, r) = seq[k - 2].div_rem(&seq[k - 1]).expect("divisor is nonzero");
            let r = r.cleaned(1e-12);
            if r.is_zero() {
                break;
            }
            seq.push(norm(r.scale(-1.0)));
        }
        seq
    }

    fn sign_changes(values: impl Iterator<Item = f64>) -> usize {
        let mut last = 0.0;
        let mut count = 0;
        for v in values {
            if v == 0.0 {
                continue;
            }
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                count += 1;
            }
            last = v;
        }
        count
    }

    fn variations_at(seq: &[Poly], x: f64) -> usize {
        if x.is_infinite() {
            Self::sign_changes(seq.iter().map(|p| p.leading() * if x < 0.0 && p.degree().unwrap_or(0) % 2 == 1 { -1.0 } else { 1.0 }))
        } else {
            Self::sign_changes(seq.iter().map(|p| p.eval(x)))
        }
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count_roots(&self, a: f64, b: f64) -> usize {
        let seq = self.sturm_sequence();
        Self::variations_at(&seq, a).saturating_sub(Self::variations_at(&seq, b))
    }

    /// Disjoint intervals in `(0, ∞)`, each containing exactly one distinct
    /// real root, sorted.
    pub fn isolate_positive_roots(&self) -> Vec<(f64, f64)> {
        let Some(n) = self.degree() else { return Vec::new() };
        if n == 0 {
            return Vec::new();
        }
        let seq = self.sturm_sequence();
        let lead = self.leading();
        let bound = 1.0 + self.coeffs[..n].iter().fold(0.0_f64, |m, c| m.max((c / lead).abs()));
        let mut out = Vec::new();
        let mut stack = vec![(0.0, bound, Self::variations_at(&seq, 0.0), Self::variations_at(&seq, bound))];
        while let Some((a, b, va, vb)) = stack.pop() {
            let count = va.saturating_sub(vb);
            if count == 0 {
                continue;
            }
            if count == 1 || b - a <= 1e-14 * bound {
                out.push((a, b));
                continue;
            }
            // Split away from (numerical) roots so the sign counts stay exact.
            let mid = [0.5, 0.4731, 0.5269, 0.4417, 0.5583]
                .iter()
                .map(|f| a + f * (b - a))
                .find(|&x| self.eval(x).abs() > 1e-9 * self.eval_abs(x))
                .unwrap_or(0.5 * (a + b));
            let vm = Self::variations_at(&seq, mid);
            stack.push((mid, b, vm, vb));
            stack.push((a, mid, va, vm));
        }
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }

    /// Distinct positive real roots, each refined by Sturm bisection to
    /// relative width `1e-14`.
    pub fn positive_roots(&self) -> Vec<f64> {
        let seq = self.sturm_sequence();
        self.isolate_positive_roots()
            .into_iter()
            .map(|(mut a, mut b)| {
                let mut vb = Self::variations_at(&seq, b);
                for _ in 0..200 {
                    if b - a <= 1e-14 * b {
                        break;
                    }
                    let mid = 0.5 * (a + b);
                    let vm = Self::variations_at(&seq, mid);
                    if vm > vb {
                        // root in (mid, b]
                        a = mid;
                    } else {
                        b = mid;
                        vb = vm;
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let show_mag = k == 0 || mag != 1.0;
            if show_mag {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "s")?,
                _ => write!(f, "s^{k}")?,
            }
        }
        Ok(())
    }
}
