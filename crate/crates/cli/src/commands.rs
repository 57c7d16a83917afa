use std::io::Write as _;
use std::path::Path;

use posys::distributed::{distributed_certificate_with, distributed_verify, max_step, CertificateOptions, RunStatus};
use posys::kyp::{default_grid, kyp_report, kyp_report_bilinear, KypReport, DEFAULT_GRID};
use posys::linalg::spectral_abscissa;
use posys::model::{ModelFile, StateSpaceModel};
use posys::performance::{induced_norm, l1_certificate, linf_certificate, static_gain, NormKind};
use posys::posdom::{
    check_hypotheses, dominated_achieved_norm, hinf_norm_dominated, matrix_dominance_witness, synthesize_dominated,
    verify_dominated, RationalTransferMatrix,
};
use posys::power::solve_power_flow;
use posys::pqp::{nsd_decompose, pqp_dual, pqp_primal};
use posys::stability::{
    assess, continuous_certificate, discrete_certificate, verify_rowwise, CertificateKind, StabilityCertificate,
    StabilityStatus,
};
use posys::synthesis::{self, achieved_norm, verify_synthesis, CheckReport, SynthesisGoal};
use posys::{Error, Matrix, Result, TimeDomain};

use crate::presets;
use crate::report::{num, vec, Report};
use crate::Source;

/// Loads the model named by `--input` or `--preset`.
pub fn load(source: &Source) -> Result<ModelFile> {
    match (&source.input, &source.preset) {
        (Some(path), _) => ModelFile::load(path),
        (None, Some(name)) => {
            let model = presets::model(name)?;
            model.validate()?;
            Ok(model)
        }
        (None, None) => Err(Error::InvalidArgument("give --input PATH or --preset NAME".into())),
    }
}

fn wrong_kind(model: &ModelFile, expected: &str) -> Error {
    Error::Model(format!("expected a {expected} model, got `{}`", model.kind()))
}

fn state_space(source: &Source) -> Result<(StateSpaceModel, ModelFile)> {
    let model = load(source)?;
    match &model {
        ModelFile::StateSpace(m) => Ok((m.clone(), model)),
        other => Err(wrong_kind(other, "state_space")),
    }
}

fn norm_label(kind: NormKind) -> &'static str {
    match kind {
        NormKind::One => "1",
        NormKind::Two => "2",
        NormKind::Inf => "∞",
    }
}

fn push_checks(report: &mut Report, checks: &CheckReport) {
    for c in &checks.checks {
        let detail = if c.detail.is_empty() { String::new() } else { format!(" ({})", c.detail) };
        report.line(format!("  [{}] {}{detail}", if c.pass { "ok" } else { "FAILED" }, c.name));
    }
}

pub fn stability(source: &Source) -> Result<Report> {
    let (m, model) = state_space(source)?;
    let mut report = Report::new("stability");
    report.model = Some(model.to_json_value());
    let assessment = assess(&m.a, m.time_domain)?;
    let label = match m.time_domain {
        TimeDomain::Continuous => "spectral abscissa",
        TimeDomain::Discrete => "spectral radius",
    };
    report.line(format!("status: {:?}", assessment.status).to_lowercase());
    report.line(format!("{label}: {}", num(assessment.spectral_value)));
    match &assessment.primal {
        Some(cert) => {
            report.line(format!("ξ = {}", vec(&cert.values)));
            let rows = verify_rowwise(&m.a, cert)?;
            for r in &rows.rows {
                report.line(format!("  row {}: slack {} {}", r.row + 1, num(r.slack), if r.pass { "ok" } else { "FAILED" }));
            }
            report.set("row_checks", &rows);
        }
        None => report.line("no ξ certificate exists"),
    }
    if let Some(z) = &assessment.dual {
        report.line(format!("z = {}", vec(&z.values)));
    }
    if let (Some(p), Some(l)) = (&assessment.lyapunov, assessment.lyapunov_lambda_max) {
        report.line(format!("P = diag{}, λ_max = {}", vec(&p.values), num(l)));
    }
    report.positive = assessment.status == StabilityStatus::Stable;
    report.set("assessment", &assessment);
    Ok(report)
}

pub fn norm(source: &Source, kind: NormKind) -> Result<Report> {
    let (m, model) = state_space(source)?;
    let mut report = Report::new("norm");
    report.model = Some(model.to_json_value());
    let sys = m.system()?;
    report.set("p", kind);
    if !sys.is_stable()? {
        report.line("system is not stable; every induced norm is infinite");
        report.set("norm", Option::<f64>::None);
        return Ok(report);
    }
    let g = static_gain(&sys)?;
    let value = induced_norm(&sys, kind)?;
    report.line(format!("G(0) = {}", rows(&g)));
    report.line(format!("{}-induced norm = {}", norm_label(kind), num(value)));
    report.set("static_gain", &g);
    report.set("norm", value);
    report.positive = true;
    Ok(report)
}

fn rows(m: &Matrix) -> String {
    let parts: Vec<String> = (0..m.rows()).map(|i| vec(m.row(i))).collect();
    format!("[{}]", parts.join(", "))
}

pub fn certify(source: &Source, gamma: f64, kind: NormKind) -> Result<Report> {
    let (m, model) = state_space(source)?;
    let mut report = Report::new("certify");
    report.model = Some(model.to_json_value());
    let sys = m.system()?;
    let cert = match kind {
        NormKind::Inf => linf_certificate(&sys, gamma)?,
        NormKind::One => l1_certificate(&sys, gamma)?,
        NormKind::Two => {
            return Err(Error::InvalidArgument("certificates exist for --p 1 and --p inf only".into()));
        }
    };
    report.set("gamma", gamma);
    report.set("p", kind);
    match &cert {
        Some(c) => {
            let name = if kind == NormKind::Inf { "ξ" } else { "p" };
            report.line(format!("{}-induced norm < {} certified", norm_label(kind), num(gamma)));
            report.line(format!("{name} = {}", vec(&c.vector)));
            report.line(format!("margin {}", num(c.margin)));
        }
        None => report.line(format!("no certificate: {}-induced norm is not below {}", norm_label(kind), num(gamma))),
    }
    report.positive = cert.is_some();
    report.set("certificate", &cert);
    Ok(report)
}

pub fn synthesize(source: &Source, gamma: Option<f64>) -> Result<Report> {
    let model = load(source)?;
    let ModelFile::Synthesis(m) = &model else {
        return Err(wrong_kind(&model, "synthesis"));
    };
    let prob = m.problem()?;
    let mut report = Report::new("synthesize");
    report.model = Some(model.to_json_value());

    if let Some(gains) = &m.gains {
        let cl = prob.closed_loop(gains)?;
        let abscissa = spectral_abscissa(&cl.a)?;
        report.line(format!("given gains {}", vec(gains)));
        report.line(format!("closed-loop spectral abscissa {}", num(abscissa)));
        report.set("gains", gains);
        report.set("spectral_abscissa", abscissa);
        if abscissa >= 0.0 {
            report.line("closed loop is not stable");
            return Ok(report);
        }
        let achieved = achieved_norm(&prob, gains)?;
        report.line(format!("achieved norm {}", num(achieved)));
        report.set("achieved", achieved);
        report.positive = gamma.map_or(true, |g| achieved < g);
        return Ok(report);
    }

    let goal = match gamma {
        Some(g) => SynthesisGoal::MeetGamma(g),
        None if prob.c.rows() == 0 => SynthesisGoal::Stabilize,
        None => SynthesisGoal::MinimizeGamma,
    };
    report.set("goal", goal);
    let Some(result) = synthesis::synthesize(&prob, goal)? else {
        report.line("no admissible gains achieve the goal");
        return Ok(report);
    };
    if let Some(g) = result.gamma {
        report.line(format!("γ = {}", num(g)));
    }
    report.line(format!("gains L = diag{}", vec(&result.gains)));
    report.line(format!("certificate = {}", vec(&result.certificate.vector)));
    report.line(format!("multipliers = {}", vec(&result.multipliers)));
    let checks = verify_synthesis(&prob, &result)?;
    report.line("verification:");
    push_checks(&mut report, &checks);
    if result.gamma.is_some() {
        let achieved = achieved_norm(&prob, &result.gains)?;
        report.line(format!("achieved norm {}", num(achieved)));
        report.set("achieved", achieved);
    }
    report.positive = checks.pass();
    report.set("synthesis", &result);
    report.set("checks", &checks);
    Ok(report)
}

fn grid_dominated(g: &RationalTransferMatrix, grid: &[f64]) -> Result<bool> {
    let dc = g.dc_gain()?;
    for &w in grid {
        let h = g.at_frequency(w);
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                if h.get(i, j).norm() > dc[(i, j)] * (1.0 + 1e-9) + 1e-12 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

pub fn dominance(source: &Source, grid: Option<usize>) -> Result<Report> {
    let model = load(source)?;
    let ModelFile::TransferMatrix(m) = &model else {
        return Err(wrong_kind(&model, "transfer_matrix"));
    };
    let mut report = Report::new("dominance");
    report.model = Some(model.to_json_value());
    if let Some(g) = &m.matrix {
        let witness = matrix_dominance_witness(g)?;
        let stable = g.is_stable();
        let dominated = stable && witness.is_none();
        if !stable {
            report.line("not dominated: some entry is unstable");
        } else if let Some((i, j, w)) = witness {
            report.line(format!("not dominated: |G{}{}(iω)| > G{}{}(0) at ω = {}", i + 1, j + 1, i + 1, j + 1, num(w)));
            report.set("witness", (i, j, w));
        } else {
            let hinf = hinf_norm_dominated(g)?;
            report.line("positively dominated");
            report.line(format!("H∞ norm = ‖G(0)‖₂ = {}", num(hinf)));
            report.set("hinf_norm", hinf);
        }
        if stable {
            let samples = default_grid(TimeDomain::Continuous, grid.unwrap_or(DEFAULT_GRID));
            let sampled = grid_dominated(g, &samples)?;
            let agree = sampled || !dominated;
            report.line(format!(
                "grid check over {} frequencies: {}",
                samples.len(),
                if sampled { "no violation" } else { "violation found" }
            ));
            report.set("grid_agrees", agree);
        }
        report.positive = dominated;
        report.set("dominated", dominated);
    }
    if let Some(prob) = &m.problem {
        let hyp = check_hypotheses(prob)?;
        report.line("hypotheses:");
        push_checks(&mut report, &hyp);
        report.set("hypotheses", &hyp);
        if !hyp.pass() {
            report.positive = false;
            return Ok(report);
        }
        if let Some(gains) = &m.gains {
            let achieved = dominated_achieved_norm(prob, gains)?;
            report.line(format!("given gains {} achieve ‖G‖∞ = {}", vec(gains), num(achieved)));
            report.set("achieved", achieved);
            report.positive = achieved.is_finite();
            return Ok(report);
        }
        match synthesize_dominated(prob)? {
            Some(result) => {
                if let Some(g) = result.gamma {
                    report.line(format!("γ = {}", num(g)));
                }
                report.line(format!("gains = {}", vec(&result.gains)));
                let checks = verify_dominated(prob, &result)?;
                report.line("verification:");
                push_checks(&mut report, &checks);
                report.positive = checks.pass() && m.matrix.as_ref().map_or(true, |_| report.positive);
                report.set("synthesis", &result);
                report.set("checks", &checks);
            }
            None => {
                report.line("no admissible gains");
                report.positive = false;
            }
        }
    }
    Ok(report)
}

fn kyp_lines(report: &mut Report, r: &KypReport, prefix: &str) {
    let names = [
        "frequency inequality for all ω",
        "inequality at ω = 0",
        "diagonal P",
        "linear certificate (x, u, p)",
    ];
    for (k, (name, v)) in names.iter().zip(r.verdicts()).enumerate() {
        report.line(format!("{prefix}({}) {name}: {}", k + 1, format!("{v:?}").to_lowercase()));
    }
}

pub fn kyp(source: &Source, grid: Option<usize>) -> Result<Report> {
    let model = load(source)?;
    let ModelFile::Kyp(m) = &model else {
        return Err(wrong_kind(&model, "kyp"));
    };
    let inst = m.instance()?;
    let mode = m.mode.unwrap_or_default();
    let samples = default_grid(inst.time_domain, grid.unwrap_or(DEFAULT_GRID));
    let direct = kyp_report(&inst, mode, &samples)?;
    let mut report = Report::new("kyp");
    report.model = Some(model.to_json_value());
    report.line(direct.summary());
    kyp_lines(&mut report, &direct, "");
    report.line(format!(
        "worst sampled eigenvalue {} at ω = {}; at ω = 0: {}",
        num(direct.frequency_check.lambda_max),
        num(direct.frequency_check.omega),
        num(direct.static_check.lambda_max)
    ));
    if let Some(p) = &direct.p_diag {
        report.line(format!("P = diag{}", vec(p)));
    }
    if let Some(w) = &direct.linear_witness {
        report.line(format!("x = {}, u = {}, p = {}", vec(&w.x), vec(&w.u), vec(&w.p)));
    }
    if inst.time_domain == TimeDomain::Discrete {
        let continuous_grid = default_grid(TimeDomain::Continuous, grid.unwrap_or(DEFAULT_GRID));
        let via = kyp_report_bilinear(&inst, mode, &continuous_grid)?;
        report.line("via bilinear transform:");
        kyp_lines(&mut report, &via, "  ");
        let same = via.verdicts() == direct.verdicts();
        report.line(format!("  verdicts {}", if same { "match" } else { "differ" }));
        report.set("bilinear", &via);
    }
    report.positive = direct.verdicts().iter().all(|v| *v == posys::kyp::Verdict::Holds);
    report.set("summary", direct.summary());
    report.set("report", &direct);
    Ok(report)
}

pub fn decompose(source: &Source, tol: f64) -> Result<Report> {
    let model = load(source)?;
    let target = match &model {
        ModelFile::StateSpace(m) => m.a.clone(),
        ModelFile::Pqp(m) => m.objective.clone(),
        other => return Err(wrong_kind(other, "state_space or pqp")),
    };
    let mut report = Report::new("decompose");
    report.model = Some(model.to_json_value());
    let dec = match nsd_decompose(&target) {
        Ok(d) => d,
        Err(Error::NotNegativeSemidefinite(top)) => {
            report.line(format!("not negative semidefinite: largest eigenvalue {}", num(top)));
            report.set("lambda_max", top);
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    for b in &dec.blocks {
        report.line(format!(
            "block ({}, {}): [[{}, {}], [{}, {}]]  λ_max {}",
            b.k + 1,
            b.l + 1,
            num(b.block[0][0]),
            num(b.block[0][1]),
            num(b.block[1][0]),
            num(b.block[1][1]),
            num(b.lambda_max())
        ));
    }
    for (i, v) in &dec.isolated {
        report.line(format!("isolated node {}: {}", i + 1, num(*v)));
    }
    let residual = dec.reconstruct().checked_sub(&target)?.max_abs();
    report.line(format!("reconstruction error {}", num(residual)));
    report.positive = residual <= tol;
    report.set("decomposition", &dec);
    report.set("reconstruction_error", residual);
    Ok(report)
}

pub fn pqp(source: &Source, tol: f64) -> Result<Report> {
    let model = load(source)?;
    let mut report = Report::new("pqp");
    report.model = Some(model.to_json_value());
    let inst = match &model {
        ModelFile::Pqp(m) => m.instance()?,
        ModelFile::PowerNetwork(net) => {
            let flow = solve_power_flow(net)?;
            report.line(format!("primal loss {}", num(flow.primal_loss)));
            report.line(format!("dual loss   {}", num(flow.dual_loss)));
            report.line(format!("gap {}", num(flow.gap)));
            report.line(format!("voltages {}", vec(&flow.voltages)));
            report.line(format!("line currents {}", vec(&flow.line_currents)));
            report.positive = flow.gap <= tol;
            report.set("power_flow", &flow);
            return Ok(report);
        }
        other => return Err(wrong_kind(other, "pqp or power_network")),
    };
    let primal = pqp_primal(&inst)?;
    let dual = pqp_dual(&inst)?;
    let gap = (primal.value - dual.value).abs();
    report.line(format!("primal value {} at x = {}", num(primal.value), vec(&primal.x)));
    report.line(format!("dual value   {} at τ = {}", num(dual.value), vec(&dual.tau)));
    report.line(format!("gap {}", num(gap)));
    report.positive = gap <= tol;
    report.set("primal", serde_json::json!({ "value": primal.value, "x": primal.x, "gap_bound": primal.gap_bound }));
    report.set(
        "dual",
        serde_json::json!({ "value": dual.value, "tau": dual.tau, "lambda_max": dual.lambda_max, "cuts": dual.cuts }),
    );
    report.set("gap", gap);
    Ok(report)
}

fn central_certificate(m: &StateSpaceModel) -> Result<Option<StabilityCertificate>> {
    match m.time_domain {
        TimeDomain::Continuous => continuous_certificate(&m.a),
        TimeDomain::Discrete => discrete_certificate(&m.a),
    }
}

pub fn dist_verify(source: &Source) -> Result<Report> {
    let (m, model) = state_space(source)?;
    let mut report = Report::new("dist-verify");
    report.model = Some(model.to_json_value());
    let xi = match &m.xi {
        Some(xi) => xi.clone(),
        None => match central_certificate(&m)? {
            Some(c) => {
                report.line("no ξ in the model; checking the centralized certificate");
                c.values
            }
            None => {
                report.line("no ξ in the model and no centralized certificate exists");
                return Ok(report);
            }
        },
    };
    let verdict = distributed_verify(&m.a, &xi, m.time_domain)?;
    report.line(format!("ξ = {}", vec(&xi)));
    for n in &verdict.nodes {
        report.line(format!("  node {}: slack {} {}", n.node + 1, num(n.slack), if n.pass { "ok" } else { "FAILED" }));
    }
    report.line(format!(
        "messages {} in {} round(s), non-neighbour reads {}",
        verdict.audit.total_messages, verdict.audit.rounds, verdict.audit.non_neighbour_reads
    ));
    report.positive = verdict.pass;
    report.set("xi", &xi);
    report.set("verify", &verdict);
    Ok(report)
}

pub fn dist_certify(
    source: &Source,
    step: Option<f64>,
    delta: f64,
    max_rounds: usize,
    trace: Option<&Path>,
) -> Result<Report> {
    let (m, model) = state_space(source)?;
    let mut report = Report::new("dist-certify");
    report.model = Some(model.to_json_value());
    let a = match m.time_domain {
        TimeDomain::Continuous => m.a.clone(),
        TimeDomain::Discrete => m.a.checked_sub(&Matrix::identity(m.a.rows()))?,
    };
    let mut opts = CertificateOptions::new(step.unwrap_or_else(|| max_step(&a)), delta, max_rounds);
    opts.record_trace = trace.is_some();
    let run = distributed_certificate_with(&a, &opts)?;
    if let Some(path) = trace {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", path.display())))?;
        let mut out = std::io::BufWriter::new(file);
        for rec in &run.trace {
            let line = serde_json::to_string(rec).expect("trace record serializes");
            writeln!(out, "{line}").map_err(|e| Error::InvalidArgument(format!("writing trace: {e}")))?;
        }
        out.flush().map_err(|e| Error::InvalidArgument(format!("writing trace: {e}")))?;
    }
    let status = match run.status {
        RunStatus::Converged => "converged",
        RunStatus::Timeout => "timed out",
    };
    report.line(format!("{status} after {} round(s)", run.rounds));
    report.line(format!("ξ = {}", vec(&run.xi)));
    report.line(format!("slacks = {}", vec(&run.slacks)));
    report.line(format!(
        "messages per round {}..{}, non-neighbour reads {}",
        run.audit.min_messages_per_round, run.audit.max_messages_per_round, run.audit.non_neighbour_reads
    ));
    let cert = StabilityCertificate {
        kind: CertificateKind::PrimalXi,
        values: run.xi.clone(),
        margin: 0.0,
        time_domain: m.time_domain,
    };
    let central = verify_rowwise(&m.a, &cert)?;
    report.line(format!("centralized check: {}", if central.pass { "pass" } else { "fail" }));
    report.positive = run.status == RunStatus::Converged && central.pass;
    report.set("status", run.status);
    report.set("rounds", run.rounds);
    report.set("xi", &run.xi);
    report.set("slacks", &run.slacks);
    report.set("audit", run.audit);
    report.set("central_check", &central);
    Ok(report)
}
