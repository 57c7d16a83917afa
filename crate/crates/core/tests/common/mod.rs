//! Independent oracles (nalgebra based) and random instance generators
//! shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};
use posys::kyp::KypInstance;
use posys::posdom::{RationalFunction, RationalTransferMatrix};
use posys::pqp::PqpInstance;
use posys::{Matrix, TimeDomain};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_na(m: &DMatrix<f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn eigenvalues(a: &Matrix) -> Vec<C64> {
    na(a).complex_eigenvalues().iter().copied().collect()
}

pub fn abscissa(a: &Matrix) -> f64 {
    eigenvalues(a).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

pub fn radius(a: &Matrix) -> f64 {
    eigenvalues(a).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn sym_lambda_max(s: &DMatrix<f64>) -> f64 {
    let sym = (s + s.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Random Metzler matrix whose spectral abscissa is `target`.
pub fn metzler_with_abscissa(r: &mut ChaCha8Rng, n: usize, density: f64, target: f64) -> Matrix {
    let mut a = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            -r.gen_range(0.0..3.0)
        } else if r.gen_bool(density) {
            r.gen_range(0.0..2.0)
        } else {
            0.0
        }
    });
    let shift = target - abscissa(&a);
    for i in 0..n {
        a[(i, i)] += shift;
    }
    a
}

/// Random nonnegative matrix whose spectral radius is `target`.
pub fn nonnegative_with_radius(r: &mut ChaCha8Rng, n: usize, density: f64, target: f64) -> Matrix {
    loop {
        let b = Matrix::from_fn(n, n, |_, _| if r.gen_bool(density) { r.gen_range(0.0..2.0) } else { 0.0 });
        let rho = radius(&b);
        if rho > 1e-3 {
            return b.scale(target / rho);
        }
    }
}

pub fn nonnegative(r: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| if r.gen_bool(density) { r.gen_range(0.0..2.0) } else { 0.0 })
}

/// `C(zI − A)⁻¹B + D`.
pub fn response(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix, z: C64) -> DMatrix<C64> {
    let n = a.rows();
    let ac = na(a).map(|v| C64::new(v, 0.0));
    let resolvent = (DMatrix::<C64>::identity(n, n) * z - ac).try_inverse().expect("z is not an eigenvalue");
    let bc = na(b).map(|v| C64::new(v, 0.0));
    let cc = na(c).map(|v| C64::new(v, 0.0));
    let dc = na(d).map(|v| C64::new(v, 0.0));
    cc * resolvent * bc + dc
}

pub fn sigma_max(g: &DMatrix<C64>) -> f64 {
    if g.nrows() == 0 || g.ncols() == 0 {
        return 0.0;
    }
    g.clone().svd(false, false).singular_values.iter().copied().fold(0.0, f64::max)
}

/// `∫₀^∞ C e^{At} B dt + D` by composite Simpson, stepping with `e^{Ah}`.
pub fn impulse_integral(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> DMatrix<f64> {
    let an = na(a);
    let bn = na(b);
    let cn = na(c);
    let rate = abscissa(a).abs().max(1e-3);
    let scale = an.amax().max(rate);
    let h = 0.1 / scale;
    let horizon = 40.0 / rate;
    let mut steps = (horizon / h).ceil() as usize;
    steps += steps % 2;
    let step = (&an * h).exp();
    let mut x = bn.clone();
    let mut acc = &cn * &x;
    for k in 1..=steps {
        x = &step * &x;
        let w = if k == steps { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += (&cn * &x) * w;
    }
    acc * (h / 3.0) + na(d)
}

/// `Σ_{k≥0} C A^k B + D` for a Schur `A`.
pub fn impulse_sum(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> DMatrix<f64> {
    let an = na(a);
    let mut x = na(b);
    let cn = na(c);
    let mut acc = na(d);
    for _ in 0..200_000 {
        let term = &cn * &x;
        acc += &term;
        x = &an * &x;
        if x.amax() < 1e-16 {
            break;
        }
    }
    acc
}

pub fn max_row_sum(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows()).map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn max_col_sum(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (l, h) = (lo.ln(), hi.ln());
    (0..count).map(|k| (l + (h - l) * k as f64 / (count - 1) as f64).exp()).collect()
}

/// Polynomial with ascending coefficients at a complex point.
pub fn horner(coeffs: &[f64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + *c)
}

/// Largest `|num(iω)/den(iω)| − num(0)/den(0)` over a log grid, refined by
/// golden-section search around the best samples.
pub fn dominance_excess(num: &[f64], den: &[f64], grid: &[f64]) -> f64 {
    let g0 = num.first().copied().unwrap_or(0.0) / den[0];
    let excess = |w: f64| {
        let z = C64::new(0.0, w);
        (horner(num, z) / horner(den, z)).norm() - g0
    };
    let mut samples: Vec<(f64, usize)> = grid.iter().enumerate().map(|(k, &w)| (excess(w), k)).collect();
    let mut best = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    samples.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    for &(_, k) in samples.iter().take(5) {
        let lo = if k == 0 { grid[0] * 0.5 } else { grid[k - 1] };
        let hi = if k + 1 == grid.len() { grid[k] * 2.0 } else { grid[k + 1] };
        let (mut a, mut b) = (lo, hi);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if excess(c) > excess(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best = best.max(excess(0.5 * (a + b)));
    }
    best
}

/// Random stable denominator of the given degree (ascending, monic).
pub fn stable_den(r: &mut ChaCha8Rng, degree: usize) -> Vec<f64> {
    let mut poly = vec![1.0];
    let mut left = degree;
    while left > 0 {
        let factor: Vec<f64> = if left >= 2 && r.gen_bool(0.5) {
            left -= 2;
            let re = r.gen_range(0.05..3.0);
            let im = r.gen_range(0.0..4.0);
            vec![re * re + im * im, 2.0 * re, 1.0]
        } else {
            left -= 1;
            vec![r.gen_range(0.1..5.0), 1.0]
        };
        poly = mul_poly(&poly, &factor);
    }
    poly
}

pub fn mul_poly(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

pub fn random_symmetric_metzler(r: &mut ChaCha8Rng, n: usize, density: f64) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = r.gen_range(-2.0..1.0);
        for j in i + 1..n {
            if r.gen_bool(density) {
                let v = r.gen_range(0.0..1.5);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    }
    m
}

pub fn controllable(a: &Matrix, b: &Matrix) -> bool {
    let n = a.rows();
    let an = na(a);
    let mut blocks = vec![na(b)];
    for k in 1..n {
        let next = &an * &blocks[k - 1];
        blocks.push(next);
    }
    let ctrb = DMatrix::from_fn(n, n * b.cols(), |i, j| blocks[j / b.cols()][(i, j % b.cols())]);
    let sv = ctrb.svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > 1e-8 * top).count() == n
}

pub fn random_kyp(r: &mut ChaCha8Rng, domain: TimeDomain) -> KypInstance {
    loop {
        let n = r.gen_range(1..=4);
        let m = r.gen_range(1..=2);
        let a = match domain {
            TimeDomain::Continuous => {
                let target = -r.gen_range(0.3..2.0);
                metzler_with_abscissa(r, n, 0.5, target)
            }
            TimeDomain::Discrete => {
                let target = r.gen_range(0.2..0.9);
                nonnegative_with_radius(r, n, 0.6, target)
            }
        };
        let b = nonnegative(r, n, m, 0.7);
        if !controllable(&a, &b) {
            continue;
        }
        let size = n + m;
        let mut q = Matrix::zeros(size, size);
        for i in 0..size {
            for j in i..size {
                if i == j && i >= n {
                    continue;
                }
                if r.gen_bool(0.5) {
                    let v = r.gen_range(0.0..1.0);
                    q[(i, j)] = v;
                    q[(j, i)] = v;
                }
            }
        }
        let an = na(&a);
        let upper = match domain {
            TimeDomain::Continuous => -an.try_inverse().unwrap() * na(&b),
            TimeDomain::Discrete => (DMatrix::identity(n, n) - an).try_inverse().unwrap() * na(&b),
        };
        let w = DMatrix::from_fn(size, m, |i, j| if i < n { upper[(i, j)] } else if i - n == j { 1.0 } else { 0.0 });
        let s0 = w.transpose() * na(&q) * &w;
        let top = sym_lambda_max(&s0);
        let offset = r.gen_range(1e-3..1.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        for k in 0..m {
            q[(n + k, n + k)] -= top + offset;
        }
        return KypInstance::new(a, b, q, domain).unwrap();
    }
}

pub fn rational(num: Vec<f64>, den: Vec<f64>) -> RationalFunction {
    RationalFunction::new(num, den).unwrap()
}

/// Dominated by construction: products and positive sums of first-order
/// lags and well-damped second-order lags.
pub fn dominated_entry(r: &mut ChaCha8Rng) -> RationalFunction {
    let mut f = RationalFunction::constant(r.gen_range(0.1..2.0));
    for _ in 0..r.gen_range(1..=2) {
        let factor = if r.gen_bool(0.5) {
            let a = r.gen_range(0.2..4.0);
            rational(vec![a], vec![a, 1.0])
        } else {
            let w: f64 = r.gen_range(0.3..3.0);
            let zeta = r.gen_range(0.75..2.0);
            rational(vec![w * w], vec![w * w, 2.0 * zeta * w, 1.0])
        };
        f = if r.gen_bool(0.7) { f.mul(&factor) } else { f.add(&factor) };
    }
    f
}

pub fn dominated_matrix(r: &mut ChaCha8Rng, n: usize) -> RationalTransferMatrix {
    RationalTransferMatrix::from_fn(n, n, |_, _| if r.gen_bool(0.8) { dominated_entry(r) } else { RationalFunction::zero() })
}

pub fn random_pqp(r: &mut ChaCha8Rng) -> PqpInstance {
    let n = r.gen_range(1..=4);
    let k = r.gen_range(1..=3);
    let objective = random_symmetric_metzler(r, n, 0.6);
    let anchor: Vec<f64> = (0..n).map(|_| r.gen_range(0.1..1.0) / (n as f64).sqrt()).collect();
    let mut constraints = vec![Matrix::identity(n).scale(-1.0)];
    let mut bounds = vec![-1.0];
    for _ in 1..k {
        let m = random_symmetric_metzler(r, n, 0.6);
        let v = m.quad_form(&anchor);
        bounds.push(v - 0.1 * (1.0 + v.abs()));
        constraints.push(m);
    }
    PqpInstance::new(objective, constraints, bounds).unwrap()
}
