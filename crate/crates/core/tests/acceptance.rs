//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;

use common::*;
use posys::distributed::{distributed_certificate, distributed_verify, max_step, RunStatus, Topology};
use posys::kyp::{default_grid, kyp_report, kyp_report_bilinear, KypInstance, KypMode, Verdict, DEFAULT_GRID};
use posys::linalg::spectral_abscissa;
use posys::performance::{l1_certificate, linf_certificate, induced_norm, NormKind, PositiveStateSpace};
use posys::posdom::{
    matrix_dominated, tf_combine, tf_mul, FeedbackLoop, RationalFunction, RationalTransferMatrix, hinf_norm_dominated,
};
use posys::power::{four_node_network, solve_power_flow, two_node_loss, two_node_network, DeskDefaults};
use posys::pqp::{find_slater_point, nsd_decompose, pqp_dual, pqp_primal, PqpInstance, PrimalOptions};
use posys::presets::{
    buffer_network, formation_problem, transport_problem, BufferRates, FORMATION_CASES, TRANSPORT_GAINS_EXPECTED,
    TRANSPORT_MU, TRANSPORT_XI,
};
use posys::stability::{assess, continuous_certificate, discrete_certificate, StabilityStatus};
use posys::synthesis::{achieved_norm, point_slacks, synthesize, verify_synthesis, SynthesisGoal};
use posys::{Matrix, TimeDomain};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let prob = transport_problem();
    let Some(res) = synthesize(&prob, SynthesisGoal::Stabilize).unwrap() else {
        return outcome(false, "synthesis LP infeasible");
    };
    let strict = res.certificate.margin > 0.0 && res.certificate.vector.iter().all(|v| *v > 0.0);
    let published = point_slacks(&prob, &TRANSPORT_XI, &TRANSPORT_MU, None).unwrap();
    let published_ok = published.feasible(&TRANSPORT_XI, &TRANSPORT_MU) && published.strict_min() >= 0.9;
    let published_gains = published.gains == TRANSPORT_GAINS_EXPECTED;
    let in_box = res.gains.iter().all(|g| (0.0..=1.0).contains(g));
    let cl = prob.closed_loop(&res.gains).unwrap();
    let alpha = abscissa(&cl.a);
    let verified = verify_synthesis(&prob, &res).unwrap().pass();
    let elapsed = start.elapsed();
    outcome(
        strict && published_ok && published_gains && in_box && alpha < -1e-3 && verified && elapsed < Duration::from_secs(1),
        format!(
            "synthesized margin {:.3e}, published slack {:.3}, gains {:?}, abscissa {:.4}, {:.0} ms",
            res.certificate.margin,
            published.strict_min(),
            res.gains,
            alpha,
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for case in &FORMATION_CASES {
        let start = Instant::now();
        let prob = formation_problem(&case.b);
        let res = synthesize(&prob, SynthesisGoal::MinimizeGamma).unwrap().expect("formation LP feasible");
        let elapsed = start.elapsed();
        let gamma = res.gamma.unwrap();
        let verified = verify_synthesis(&prob, &res).unwrap().pass();
        // Independent norm of the closed loop from its static gain.
        let cl = prob.closed_loop(&res.gains).unwrap();
        let g0 = na(&cl.d) - na(&cl.c) * na(&cl.a).try_inverse().unwrap() * na(&cl.b);
        let achieved = max_col_sum(&g0);
        let lib_achieved = achieved_norm(&prob, &res.gains).unwrap();
        let ok = (gamma - case.gamma).abs() <= case.gamma_tol
            && verified
            && (achieved - gamma).abs() <= 1e-6
            && (lib_achieved - achieved).abs() <= 1e-9
            && elapsed < Duration::from_secs(1);
        pass &= ok;
        parts.push(format!("{} γ={gamma:.6} (achieved {achieved:.6}, {:.0} ms)", case.name, elapsed.as_secs_f64() * 1e3));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut disagreements = 0;
    let mut skipped = 0;
    let mut lyapunov_failures = 0;
    let mut stable_cases = 0;
    for trial in 0..200 {
        let n = r.gen_range(1..=8);
        let density = r.gen_range(0.2..0.9);
        let continuous = trial < 100;
        let (a, distance) = if continuous {
            let target = r.gen_range(-1.0..1.0) * 10f64.powf(r.gen_range(-6.0..0.0));
            let a = metzler_with_abscissa(&mut r, n, density, target);
            let d = abscissa(&a);
            (a, d)
        } else {
            let target = 1.0 + r.gen_range(-1.0..1.0) * 10f64.powf(r.gen_range(-6.0..-0.3));
            let b = nonnegative_with_radius(&mut r, n, density, target);
            let d = radius(&b) - 1.0;
            (b, d)
        };
        if distance.abs() <= 1e-7 {
            skipped += 1;
            continue;
        }
        let cert = if continuous { continuous_certificate(&a) } else { discrete_certificate(&a) }.unwrap();
        if cert.is_some() != (distance < 0.0) {
            disagreements += 1;
        }
        if distance < 0.0 {
            stable_cases += 1;
            let domain = if continuous { TimeDomain::Continuous } else { TimeDomain::Discrete };
            let assessment = assess(&a, domain).unwrap();
            let ok = match (&assessment.status, &assessment.lyapunov) {
                (StabilityStatus::Stable, Some(p)) => {
                    let pn = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(p.values.clone()));
                    let an = na(&a);
                    let form = if continuous {
                        an.transpose() * &pn + &pn * &an
                    } else {
                        an.transpose() * &pn * &an - &pn
                    };
                    sym_lambda_max(&form) < 0.0
                }
                _ => false,
            };
            if !ok {
                lyapunov_failures += 1;
            }
        }
    }
    outcome(
        disagreements == 0 && lyapunov_failures == 0,
        format!(
            "{} disagreements, {} Lyapunov failures over {stable_cases} stable cases, {skipped} marginal skipped",
            disagreements, lyapunov_failures
        ),
    )
}

fn random_stable_system(r: &mut impl Rng, rg: &mut rand_chacha::ChaCha8Rng, continuous: bool) -> PositiveStateSpace {
    let n = r.gen_range(1..=5);
    let m = r.gen_range(1..=3);
    let p = r.gen_range(1..=3);
    let a = if continuous {
        metzler_with_abscissa(rg, n, 0.5, -r.gen_range(0.5..2.0))
    } else {
        nonnegative_with_radius(rg, n, 0.6, r.gen_range(0.2..0.9))
    };
    let mut b = nonnegative(rg, n, m, 0.6);
    b[(0, 0)] += 0.5;
    let mut c = nonnegative(rg, p, n, 0.6);
    c[(0, 0)] += 0.5;
    let d = nonnegative(rg, p, m, 0.3);
    let domain = if continuous { TimeDomain::Continuous } else { TimeDomain::Discrete };
    PositiveStateSpace::new(a, b, c, d, domain).unwrap()
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let mut rg = rng(40);
    let mut worst_two: f64 = 0.0;
    let mut worst_quad: f64 = 0.0;
    let grid: Vec<f64> = std::iter::once(0.0).chain(log_grid(1e-4, 1e4, 1999)).collect();
    for _ in 0..100 {
        let sys = random_stable_system(&mut r, &mut rg, true);
        let two = induced_norm(&sys, NormKind::Two).unwrap();
        let sup = grid
            .iter()
            .map(|&w| sigma_max(&response(&sys.a, &sys.b, &sys.c, &sys.d, C64::new(0.0, w))))
            .fold(0.0, f64::max);
        worst_two = worst_two.max((two - sup).abs());
        let h = impulse_integral(&sys.a, &sys.b, &sys.c, &sys.d);
        let inf = induced_norm(&sys, NormKind::Inf).unwrap();
        let one = induced_norm(&sys, NormKind::One).unwrap();
        worst_quad = worst_quad.max((inf - max_row_sum(&h)).abs()).max((one - max_col_sum(&h)).abs());
    }
    outcome(
        worst_two <= 1e-6 && worst_quad <= 1e-4,
        format!("max |‖G(0)‖₂ − grid sup| {worst_two:.2e}; max quadrature deviation {worst_quad:.2e}"),
    )
}

fn bracket(sys: &PositiveStateSpace, kind: NormKind, norm: f64) -> (f64, f64) {
    let feasible = |g: f64| match kind {
        NormKind::Inf => linf_certificate(sys, g).unwrap().is_some(),
        _ => l1_certificate(sys, g).unwrap().is_some(),
    };
    let (mut lo, mut hi) = (0.0, 2.0 * norm + 1.0);
    assert!(feasible(hi));
    while hi - lo > 2e-7 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let mut rg = rng(50);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut runs = 0;
    for continuous in [true, false] {
        for kind in [NormKind::One, NormKind::Inf] {
            for _ in 0..10 {
                let sys = random_stable_system(&mut r, &mut rg, continuous);
                let inv = if continuous {
                    -na(&sys.a).try_inverse().unwrap()
                } else {
                    (DMatrix::identity(sys.a.rows(), sys.a.rows()) - na(&sys.a)).try_inverse().unwrap()
                };
                let g0 = na(&sys.c) * inv * na(&sys.b) + na(&sys.d);
                let norm = if kind == NormKind::Inf { max_row_sum(&g0) } else { max_col_sum(&g0) };
                let (lo, hi) = bracket(&sys, kind, norm);
                let miss = if norm < lo { lo - norm } else if norm > hi { norm - hi } else { 0.0 };
                worst = worst.max(miss).max(hi - lo);
                runs += 1;
                if !(hi - lo <= 1e-6 && norm >= lo - 1e-6 && norm <= hi + 1e-6) {
                    failures += 1;
                }
            }
        }
    }
    outcome(failures == 0, format!("{runs} bisections, {failures} failures, worst bracket error {worst:.2e}"))
}

fn random_rational(r: &mut rand_chacha::ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let degree = r.gen_range(1..=4);
    let den = stable_den(r, degree);
    let num_degree = r.gen_range(0..=degree);
    let num: Vec<f64> = match r.gen_range(0..3) {
        0 => vec![r.gen_range(0.1..5.0)],
        1 => (0..=num_degree).map(|_| r.gen_range(-1.0..2.0)).collect(),
        _ => {
            let mut p = vec![r.gen_range(0.1..3.0)];
            for _ in 0..num_degree {
                p = mul_poly(&p, &[r.gen_range(-1.0..4.0), 1.0]);
            }
            p
        }
    };
    (num, den)
}

fn grid_excess(f: &RationalFunction, grid: &[f64]) -> f64 {
    if f.is_zero() {
        return 0.0;
    }
    dominance_excess(f.num().coeffs(), f.den().coeffs(), grid)
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let grid = log_grid(1e-3, 1e3, 2000);
    let mut disagreements = 0;
    let mut ambiguous = 0;
    let mut dominated_count = 0;
    for _ in 0..500 {
        let (num, den) = random_rational(&mut r);
        let f = rational(num.clone(), den.clone());
        let verdict = f.is_positively_dominated().unwrap();
        dominated_count += verdict as usize;
        let excess = dominance_excess(&num, &den, &grid);
        let g0 = num[0] / den[0];
        if excess.abs() <= 1e-7 * g0.abs().max(1.0) {
            ambiguous += 1;
            continue;
        }
        if verdict != (excess < 0.0) {
            disagreements += 1;
        }
    }

    let mut closure_failures = 0;
    let mut hinf_worst: f64 = 0.0;
    for _ in 0..100 {
        let n = r.gen_range(1..=3);
        let g = dominated_matrix(&mut r, n);
        let h = dominated_matrix(&mut r, n);
        let (a, b) = (r.gen_range(0.0..3.0), r.gen_range(0.0..3.0));
        let product = tf_mul(&g, &h).unwrap();
        let combo = tf_combine(a, &g, b, &h).unwrap();
        for m in [&g, &h, &product, &combo] {
            let lib = matrix_dominated(m).unwrap();
            let grid_ok = m.entries().all(|(_, _, f)| grid_excess(f, &grid) <= 1e-7);
            if !(lib && grid_ok) {
                closure_failures += 1;
            }
        }
        let hinf = hinf_norm_dominated(&product).unwrap();
        let sup = std::iter::once(0.0)
            .chain(grid.iter().copied())
            .map(|w| {
                let resp = DMatrix::from_fn(n, n, |i, j| {
                    let f = product.get(i, j);
                    if f.is_zero() {
                        C64::new(0.0, 0.0)
                    } else {
                        horner(f.num().coeffs(), C64::new(0.0, w)) / horner(f.den().coeffs(), C64::new(0.0, w))
                    }
                });
                sigma_max(&resp)
            })
            .fold(0.0, f64::max);
        hinf_worst = hinf_worst.max((hinf - sup).abs());
    }

    let mut feedback_failures = 0;
    for trial in 0..100 {
        let n = r.gen_range(1..=3);
        let mut g = dominated_matrix(&mut r, n);
        let g0 = g.dc_gain().unwrap();
        let rho = radius(&g0);
        if rho < 1e-6 {
            continue;
        }
        let target = if trial % 2 == 0 { r.gen_range(0.2..0.95) } else { r.gen_range(1.0..1.5) };
        g = RationalTransferMatrix::from_fn(n, n, |i, j| g.get(i, j).scale(target / rho));
        match FeedbackLoop::new(g.clone()) {
            Ok(_) if target < 1.0 => {
                let inv0 = (DMatrix::identity(n, n) - na(&g.dc_gain().unwrap())).try_inverse().unwrap();
                for &w in &grid {
                    let z = C64::new(0.0, w);
                    let gw = DMatrix::from_fn(n, n, |i, j| {
                        let f = g.get(i, j);
                        if f.is_zero() {
                            C64::new(0.0, 0.0)
                        } else {
                            horner(f.num().coeffs(), z) / horner(f.den().coeffs(), z)
                        }
                    });
                    let inv = (DMatrix::<C64>::identity(n, n) - gw).try_inverse().unwrap();
                    let bad = (0..n).any(|i| (0..n).any(|j| inv[(i, j)].norm() > inv0[(i, j)] * (1.0 + 1e-9) + 1e-12));
                    if bad {
                        feedback_failures += 1;
                        break;
                    }
                }
            }
            Err(_) if target >= 1.0 => {}
            _ => feedback_failures += 1,
        }
    }
    outcome(
        disagreements == 0 && closure_failures == 0 && feedback_failures == 0 && hinf_worst <= 1e-6,
        format!(
            "{disagreements} dominance disagreements ({dominated_count} dominated, {ambiguous} within grid tolerance), \
             {closure_failures} closure failures, {feedback_failures} feedback failures, H∞ grid deviation {hinf_worst:.1e}"
        ),
    )
}

/// Best grid value over `[0,1]ⁿ`: feasible points only, and with each
/// constraint relaxed by its own resolution bound.
fn pqp_grid(inst: &PqpInstance) -> (f64, f64, f64) {
    let n = inst.dim();
    let points = match n {
        1 => 2001,
        2 => 301,
        3 => 61,
        _ => 25,
    };
    let h = 1.0 / (points - 1) as f64;
    let reach = h * (n as f64).sqrt() / 2.0;
    let lipschitz = |m: &Matrix| 2.0 * sigma_max(&na(m).map(|v| C64::new(v, 0.0))) * (n as f64).sqrt();
    let tol_f = lipschitz(&inst.objective) * reach;
    let tols: Vec<f64> = inst.constraints.iter().map(|m| lipschitz(m) * reach).collect();
    let (mut strict, mut relaxed) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    loop {
        for i in 0..n {
            x[i] = idx[i] as f64 * h;
        }
        let f = inst.objective_at(&x);
        let slacks = inst.constraint_slacks(&x);
        if slacks.iter().all(|s| *s >= 0.0) {
            strict = strict.max(f);
        }
        if slacks.iter().zip(&tols).all(|(s, t)| *s >= -t) {
            relaxed = relaxed.max(f);
        }
        let mut k = 0;
        loop {
            if k == n {
                return (strict, relaxed, tol_f);
            }
            idx[k] += 1;
            if idx[k] < points {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut worst_gap: f64 = 0.0;
    let mut grid_failures = 0;
    let mut solved = 0;
    while solved < 50 {
        let inst = random_pqp(&mut r);
        if find_slater_point(&inst, &PrimalOptions::default()).unwrap().is_none() {
            continue;
        }
        solved += 1;
        let primal = pqp_primal(&inst).unwrap();
        let dual = pqp_dual(&inst).unwrap();
        worst_gap = worst_gap.max((primal.value - dual.value).abs());
        let (strict, relaxed, tol_f) = pqp_grid(&inst);
        if !(strict <= primal.value + 1e-7 && primal.value <= relaxed + tol_f + 1e-9) {
            grid_failures += 1;
        }
    }
    outcome(
        worst_gap <= 1e-4 && grid_failures == 0,
        format!("worst |primal − dual| {worst_gap:.2e}; {grid_failures} grid-oracle failures over {solved} instances"),
    )
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let mut failures = 0;
    let mut worst_rec: f64 = 0.0;
    let mut worst_block = f64::NEG_INFINITY;
    for trial in 0..50 {
        let n = r.gen_range(2..=10);
        let density = r.gen_range(0.2..0.8);
        let mut m = random_symmetric_metzler(&mut r, n, density);
        let top = sym_lambda_max(&na(&m));
        let extra = if trial % 5 == 0 { 0.0 } else { r.gen_range(0.0..1.0) };
        for i in 0..n {
            m[(i, i)] -= top + extra;
        }
        let above = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| m[(i, j)] != 0.0).count();
        match nsd_decompose(&m) {
            Ok(dec) => {
                let rec = (na(&dec.reconstruct()) - na(&m)).amax();
                let block = dec.blocks.iter().map(|b| sym_lambda_max(&DMatrix::from_row_slice(2, 2, &[b.block[0][0], b.block[0][1], b.block[1][0], b.block[1][1]]))).fold(f64::NEG_INFINITY, f64::max);
                worst_rec = worst_rec.max(rec);
                worst_block = worst_block.max(block);
                if rec > 1e-8 || block > 1e-9 || dec.blocks.len() != above {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    outcome(
        failures == 0,
        format!("{failures} failures; worst reconstruction {worst_rec:.1e}, largest block eigenvalue {worst_block:.1e}"),
    )
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let grid = default_grid(TimeDomain::Continuous, DEFAULT_GRID);
    let mut disagreements = 0;
    let mut holds = 0;
    for _ in 0..100 {
        let inst = random_kyp(&mut r, TimeDomain::Continuous);
        let rep = kyp_report(&inst, KypMode::Strict, &grid).unwrap();
        if !rep.agree() {
            disagreements += 1;
        }
        holds += (rep.frequency == Verdict::Holds) as usize;
    }

    let counterexample = KypInstance::continuous(
        Matrix::from_rows(&[[-1.0]]),
        Matrix::from_rows(&[[0.0]]),
        Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]),
    )
    .unwrap();
    let rem = kyp_report(&counterexample, KypMode::NonStrict, &grid).unwrap();
    let counterexample_ok = rem.verdicts() == [Verdict::Holds, Verdict::Holds, Verdict::Fails, Verdict::Holds] && !rem.stabilizable;

    let dgrid = default_grid(TimeDomain::Discrete, DEFAULT_GRID);
    let mut discrete_mismatch = 0;
    for _ in 0..50 {
        let inst = random_kyp(&mut r, TimeDomain::Discrete);
        let direct = kyp_report(&inst, KypMode::Strict, &dgrid).unwrap();
        let via = kyp_report_bilinear(&inst, KypMode::Strict, &grid).unwrap();
        if direct.verdicts() != via.verdicts() || !direct.agree() {
            discrete_mismatch += 1;
        }
    }
    outcome(
        disagreements == 0 && counterexample_ok && discrete_mismatch == 0,
        format!(
            "{disagreements} disagreements over 100 ({holds} hold); unstabilizable instance: {}; {discrete_mismatch} discrete mismatches over 50",
            rem.summary()
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut corpus: Vec<(String, Matrix)> = vec![("buffers".into(), buffer_network(BufferRates::default()))];
    let transport = transport_problem();
    corpus.push(("transport closed loop".into(), transport.closed_loop(&TRANSPORT_GAINS_EXPECTED).unwrap().a));
    for case in &FORMATION_CASES {
        let prob = formation_problem(&case.b);
        let res = synthesize(&prob, SynthesisGoal::MinimizeGamma).unwrap().unwrap();
        corpus.push((format!("formation {} closed loop", case.name), prob.closed_loop(&res.gains).unwrap().a));
    }
    let mut r = rng(10);
    for k in 0..100 {
        let n = r.gen_range(1..=8);
        let target = -10f64.powf(r.gen_range(-3.0..0.5));
        let density = r.gen_range(0.2..0.9);
        corpus.push((format!("random {k}"), metzler_with_abscissa(&mut r, n, density, target)));
    }
    let mut failures = Vec::new();
    let mut max_rounds = 0;
    for (name, a) in &corpus {
        assert!(spectral_abscissa(a).unwrap() < 0.0, "{name} must be stable");
        let run = distributed_certificate(a, max_step(a), 1e-12, 1_000_000).unwrap();
        max_rounds = max_rounds.max(run.rounds);
        let edges = Topology::from_matrix(a).unwrap().edge_count() as u64;
        let central = na(a) * nalgebra::DVector::from_vec(run.xi.clone());
        let central_ok = run.xi.iter().all(|v| *v > 0.0) && central.iter().all(|v| *v < 0.0);
        let verify = distributed_verify(a, &run.xi, TimeDomain::Continuous).unwrap();
        let audit_ok = run.audit.non_neighbour_reads == 0
            && verify.audit.non_neighbour_reads == 0
            && (run.audit.rounds == 0 || (run.audit.min_messages_per_round == edges && run.audit.max_messages_per_round == edges))
            && verify.audit.min_messages_per_round == edges
            && verify.audit.max_messages_per_round == edges;
        if run.status != RunStatus::Converged || !central_ok || !verify.pass || !audit_ok {
            failures.push(name.clone());
        }
    }
    outcome(
        failures.is_empty(),
        format!("{} instances, {} failures {:?}, at most {max_rounds} rounds", corpus.len(), failures.len(), failures),
    )
}

fn criterion_11() -> Outcome {
    let flow = solve_power_flow(&four_node_network(DeskDefaults::default())).unwrap();
    let exact = two_node_loss(0.3, 0.1, 1.1).unwrap();
    let two = solve_power_flow(&two_node_network(0.3, 0.1, 0.9, 1.1)).unwrap();
    let gap = (flow.primal_loss - flow.dual_loss).abs();
    let closed = (two.primal_loss - exact).abs();
    outcome(
        gap <= 1e-3 && closed <= 1e-6,
        format!(
            "primal {:.10}, dual {:.10}, gap {gap:.1e}; two-node {:.8} vs closed form {exact:.8}",
            flow.primal_loss, flow.dual_loss, two.primal_loss
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("transport network synthesis", criterion_1),
        ("formation γ values", criterion_2),
        ("certificate vs eigenvalue equivalence", criterion_3),
        ("induced norms from static gain", criterion_4),
        ("performance certificate bisection", criterion_5),
        ("positively dominated suite", criterion_6),
        ("PQP duality", criterion_7),
        ("NSD decomposition", criterion_8),
        ("KYP suite", criterion_9),
        ("distributed certificates", criterion_10),
        ("power-flow demo", criterion_11),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != k + 1) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += !result.pass as usize;
        println!(
            "{} {:>2} {name}: {} [{:.1} s]",
            if result.pass { "PASS" } else { "FAIL" },
            k + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
