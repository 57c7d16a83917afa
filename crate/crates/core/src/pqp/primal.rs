//! Log-barrier Newton method on the concave reformulation in `y = x²`.

use super::{sqrt_form, sqrt_form_value, PqpInstance};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimalOptions {
    /// Box `y_i ≤ box_bound`; reaching it reports the problem unbounded.
    pub box_bound: f64,
    /// Stop once the barrier gap bound falls below `gap · max(1, |value|)`.
    pub gap: f64,
    pub max_newton: usize,
}

impl Default for PrimalOptions {
    fn default() -> Self {
        Self { box_bound: 1e4, gap: 1e-10, max_newton: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Upper bound on how far `value` can be below the optimum.
    pub gap_bound: f64,
}

pub fn pqp_primal(inst: &PqpInstance) -> Result<PrimalSolution> {
    pqp_primal_with(inst, &PrimalOptions::default())
}

pub fn pqp_primal_with(inst: &PqpInstance, opts: &PrimalOptions) -> Result<PrimalSolution> {
    inst.validate()?;
    let y0 = find_slater_point(inst, opts)?
        .ok_or_else(|| Error::Infeasible("no strictly feasible point: constraints admit no interior".into()))?;
    let n = inst.dim();
    let k = inst.num_constraints();
    let barrier_terms = (k + 2 * n) as f64;
    let mut y = y0;
    let mut t = 1.0;
    loop {
        y = newton_maximize(y, opts, |y| primal_barrier(inst, y, t, opts.box_bound))?;
        let value = sqrt_form_value(&inst.objective, &y);
        let gap = barrier_terms / t;
        if gap <= opts.gap * value.abs().max(1.0) {
            if y.iter().any(|v| *v >= 0.5 * opts.box_bound) {
                return Err(Error::Unbounded(format!(
                    "primal iterate reached the search box y ≤ {}",
                    opts.box_bound
                )));
            }
            let x = y.iter().map(|v| v.sqrt()).collect();
            return Ok(PrimalSolution { x, value, gap_bound: gap });
        }
        t *= 10.0;
    }
}

/// `y > 0` with `f_k(y) > b_k` for every constraint, or `None` when the
/// phase-one optimum proves there is none inside the box.
pub fn find_slater_point(inst: &PqpInstance, opts: &PrimalOptions) -> Result<Option<Vec<f64>>> {
    let n = inst.dim();
    let k = inst.num_constraints();
    let start = vec![1.0; n];
    if k == 0 {
        return Ok(Some(start));
    }
    let slack = |y: &[f64]| -> f64 {
        inst.constraints
            .iter()
            .zip(&inst.bounds)
            .map(|(m, b)| sqrt_form_value(m, y) - b)
            .fold(f64::INFINITY, f64::min)
    };
    if slack(&start) > 0.0 {
        return Ok(Some(start));
    }
    // Variables (y, s): maximize s subject to f_k(y) − b_k > s.
    let mut z = start.clone();
    z.push(slack(&start) - 1.0);
    let terms = (k + 2 * n) as f64;
    let mut t = 1.0;
    for _ in 0..30 {
        z = newton_maximize(z, opts, |z| phase_one_barrier(inst, z, t, opts.box_bound))?;
        let y = &z[..n];
        if slack(y) > 0.0 {
            return Ok(Some(y.to_vec()));
        }
        if z[n] + terms / t < 0.0 {
            return Ok(None);
        }
        t *= 10.0;
    }
    Ok(None)
}

type Local = (f64, Vec<f64>, Matrix);

fn box_terms(y: &[f64], cap: f64, value: &mut f64, grad: &mut [f64], hess: &mut Matrix) -> bool {
    for (i, &v) in y.iter().enumerate() {
        if !(v > 0.0 && v < cap) {
            return false;
        }
        *value += v.ln() + (cap - v).ln();
        grad[i] += 1.0 / v - 1.0 / (cap - v);
        hess[(i, i)] -= 1.0 / (v * v) + 1.0 / ((cap - v) * (cap - v));
    }
    true
}

fn add_log_term(g: f64, grad_g: &[f64], hess_g: &Matrix, value: &mut f64, grad: &mut [f64], hess: &mut Matrix) {
    let n = grad_g.len();
    *value += g.ln();
    for i in 0..n {
        grad[i] += grad_g[i] / g;
        for j in 0..n {
            hess[(i, j)] += hess_g[(i, j)] / g - grad_g[i] * grad_g[j] / (g * g);
        }
    }
}

fn primal_barrier(inst: &PqpInstance, y: &[f64], t: f64, cap: f64) -> Option<Local> {
    let n = y.len();
    let mut value = 0.0;
    let mut grad = vec![0.0; n];
    let mut hess = Matrix::zeros(n, n);
    if !box_terms(y, cap, &mut value, &mut grad, &mut hess) {
        return None;
    }
    for (m, b) in inst.constraints.iter().zip(&inst.bounds) {
        let (f, g, h) = sqrt_form(m, y);
        if !(f - b > 0.0) {
            return None;
        }
        add_log_term(f - b, &g, &h, &mut value, &mut grad, &mut hess);
    }
    let (f0, g0, h0) = sqrt_form(&inst.objective, y);
    value += t * f0;
    for i in 0..n {
        grad[i] += t * g0[i];
        for j in 0..n {
            hess[(i, j)] += t * h0[(i, j)];
        }
    }
    Some((value, grad, hess))
}

fn phase_one_barrier(inst: &PqpInstance, z: &[f64], t: f64, cap: f64) -> Option<Local> {
    let n = z.len() - 1;
    let y = &z[..n];
    let s = z[n];
    let mut value = t * s;
    let mut grad = vec![0.0; n + 1];
    grad[n] = t;
    let mut hess = Matrix::zeros(n + 1, n + 1);
    {
        let mut gy = vec![0.0; n];
        let mut hy = Matrix::zeros(n, n);
        if !box_terms(y, cap, &mut value, &mut gy, &mut hy) {
            return None;
        }
        for i in 0..n {
            grad[i] += gy[i];
            hess[(i, i)] += hy[(i, i)];
        }
    }
    for (m, b) in inst.constraints.iter().zip(&inst.bounds) {
        let (f, g, h) = sqrt_form(m, y);
        let slack = f - b - s;
        if !(slack > 0.0) {
            return None;
        }
        let mut gg = g.clone();
        gg.push(-1.0);
        let mut hh = Matrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                hh[(i, j)] = h[(i, j)];
            }
        }
        add_log_term(slack, &gg, &hh, &mut value, &mut grad, &mut hess);
    }
    Some((value, grad, hess))
}

/// Damped Newton ascent on a concave barrier; `eval` returns `None`
/// outside the domain. Steps are computed in variables scaled by the
/// current iterate magnitude to tame the `1/y²` terms.
pub(crate) fn newton_maximize(
    mut z: Vec<f64>,
    opts: &PrimalOptions,
    mut eval: impl FnMut(&[f64]) -> Option<Local>,
) -> Result<Vec<f64>> {
    let nz = z.len();
    let (mut value, mut grad, mut hess) =
        eval(&z).ok_or_else(|| Error::InvalidArgument("barrier start point outside the domain".into()))?;
    for _ in 0..opts.max_newton {
        let scale: Vec<f64> = z
            .iter()
            .map(|v| {
                let a = v.abs();
                if a > 0.0 && a < 1.0 {
                    a
                } else {
                    1.0
                }
            })
            .collect();
        let neg_h = Matrix::from_fn(nz, nz, |i, j| -hess[(i, j)] * scale[i] * scale[j]);
        let rhs: Vec<f64> = (0..nz).map(|i| grad[i] * scale[i]).collect();
        let step_scaled = match neg_h.solve(&rhs) {
            Ok(s) => s,
            Err(_) => {
                let reg = neg_h.max_abs() * 1e-12;
                let damped = Matrix::from_fn(nz, nz, |i, j| neg_h[(i, j)] + if i == j { reg } else { 0.0 });
                damped.solve(&rhs)?
            }
        };
        let step: Vec<f64> = step_scaled.iter().zip(&scale).map(|(d, s)| d * s).collect();
        let decrement: f64 = grad.iter().zip(&step).map(|(g, d)| g * d).sum();
        if !decrement.is_finite() {
            return Err(Error::NonFinite("Newton step".into()));
        }
        if decrement <= 2e-14 {
            return Ok(z);
        }
        let mut s = 1.0;
        let mut accepted = None;
        for _ in 0..80 {
            let trial: Vec<f64> = z.iter().zip(&step).map(|(a, d)| a + s * d).collect();
            if let Some(local) = eval(&trial) {
                if local.0 >= value + 0.25 * s * decrement {
                    accepted = Some((trial, local));
                    break;
                }
            }
            s *= 0.5;
        }
        match accepted {
            Some((trial, (v, g, h))) => {
                z = trial;
                value = v;
                grad = g;
                hess = h;
            }
            None => return Ok(z),
        }
    }
    Ok(z)
}
