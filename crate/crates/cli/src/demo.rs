use std::path::Path;

use serde_json::json;

use posys::distributed::distributed_verify;
use posys::linalg::spectral_abscissa;
use posys::model::{ModelFile, SynthesisModel};
use posys::posdom::{check_hypotheses, dominated_achieved_norm, inertial_chain, synthesize_dominated, verify_dominated};
use posys::power::{four_node_network, solve_power_flow, two_node_loss, two_node_network, DeskDefaults, PowerNetwork};
use posys::presets::{
    formation_problem, transport_problem, FORMATION_CASES, FORMATION_GAINS, TRANSPORT_GAINS, TRANSPORT_GAINS_EXPECTED,
    TRANSPORT_MU, TRANSPORT_XI,
};
use posys::synthesis::{achieved_norm, point_slacks, synthesize, verify_synthesis, SynthesisGoal};
use posys::{Error, Result, TimeDomain};

use crate::report::{mark, num, vec, Report};

pub const PRESETS: [&str; 4] = ["transport", "formation", "formation-inertial", "power-flow"];

const INERTIAL_GAMMA: f64 = 0.5;

struct Checks<'a> {
    report: &'a mut Report,
    records: Vec<serde_json::Value>,
}

impl Checks<'_> {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.report.line(format!("{} {name}: {detail}", mark(pass)));
        self.records.push(json!({ "name": name, "pass": pass, "detail": detail }));
    }

    fn compare(&mut self, name: &str, expected: f64, got: f64, tol: f64) {
        let delta = (got - expected).abs();
        let detail = format!("expected {}, got {}, Δ {:.2e} (tol {:.0e})", num(expected), num(got), delta, tol);
        self.check(name, delta <= tol, detail);
    }
}

pub fn run(preset: Option<&str>, input: Option<&Path>) -> Result<Report> {
    let mut report = Report::new("demo");
    let names: Vec<&str> = match preset {
        Some(p) if PRESETS.contains(&p) => vec![p],
        Some(p) => {
            return Err(Error::InvalidArgument(format!("unknown demo `{p}`; available: {}", PRESETS.join(", "))))
        }
        None => PRESETS.to_vec(),
    };
    if input.is_some() && names != ["power-flow"] {
        return Err(Error::InvalidArgument("--input applies to the power-flow demo only".into()));
    }
    let mut checks = Checks { report: &mut report, records: Vec::new() };
    for name in &names {
        checks.report.line(format!("== {name} =="));
        match *name {
            "transport" => transport(&mut checks)?,
            "formation" => formation(&mut checks)?,
            "formation-inertial" => formation_inertial(&mut checks)?,
            "power-flow" => {
                let net = match input {
                    Some(path) => match ModelFile::load(path)? {
                        ModelFile::PowerNetwork(n) => n,
                        other => {
                            return Err(Error::Model(format!("expected a power_network model, got `{}`", other.kind())))
                        }
                    },
                    None => four_node_network(DeskDefaults::default()),
                };
                power_flow(&mut checks, &net, input.is_none())?;
                checks.report.model = Some(ModelFile::PowerNetwork(net).to_json_value());
            }
            _ => unreachable!(),
        }
    }
    let records = std::mem::take(&mut checks.records);
    let positive = records.iter().all(|r| r["pass"] == true);
    if names == ["transport"] {
        report.model = Some(ModelFile::Synthesis(SynthesisModel::from_problem(&transport_problem())).to_json_value());
    }
    if names.len() > 1 {
        report.model = None;
    }
    report.set("presets", &names);
    report.set("checks", records);
    report.positive = positive;
    Ok(report)
}

fn transport(c: &mut Checks) -> Result<()> {
    let prob = transport_problem();
    let published = point_slacks(&prob, &TRANSPORT_XI, &TRANSPORT_MU, None)?;
    c.check(
        "published (ξ, μ) feasible",
        published.feasible(&TRANSPORT_XI, &TRANSPORT_MU) && published.strict_min() >= 0.9,
        format!("smallest strict slack {} (needs ≥ 0.9)", num(published.strict_min())),
    );
    let same = published.gains.iter().zip(TRANSPORT_GAINS_EXPECTED).all(|(a, b)| (a - b).abs() <= 1e-12);
    c.check(
        "published gains",
        same,
        format!("expected {}, got {}", vec(&TRANSPORT_GAINS_EXPECTED), vec(&published.gains)),
    );
    let cl_published = prob.closed_loop(&published.gains)?;
    let dv = distributed_verify(&cl_published.a, &TRANSPORT_XI, TimeDomain::Continuous)?;
    c.check(
        "published ξ verified node by node",
        dv.pass && dv.audit.non_neighbour_reads == 0,
        format!("slacks {}", vec(&dv.nodes.iter().map(|n| n.slack).collect::<Vec<_>>())),
    );

    let Some(res) = synthesize(&prob, SynthesisGoal::Stabilize)? else {
        c.check("synthesis LP feasible", false, "LP reported infeasible".into());
        return Ok(());
    };
    let in_box = res.gains.iter().all(|g| (0.0..=1.0).contains(g));
    c.check("synthesized gains in [0, 1]", in_box, vec(&res.gains));
    let checks = verify_synthesis(&prob, &res)?;
    let failed: Vec<&str> = checks.failures().map(|f| f.name.as_str()).collect();
    c.check("verify_synthesis", checks.pass(), if failed.is_empty() { "all checks pass".into() } else { failed.join(", ") });
    let cl = prob.closed_loop(&res.gains)?;
    let abscissa = spectral_abscissa(&cl.a)?;
    c.check("closed-loop spectral abscissa < −1e−3", abscissa < -1e-3, num(abscissa));
    let dv = distributed_verify(&cl.a, &res.certificate.vector, TimeDomain::Continuous)?;
    c.check(
        "synthesized ξ verified node by node",
        dv.pass && dv.audit.non_neighbour_reads == 0,
        format!("{} messages, non-neighbour reads {}", dv.audit.total_messages, dv.audit.non_neighbour_reads),
    );
    c.report.line("gain      synthesized  published");
    for (k, name) in TRANSPORT_GAINS.iter().enumerate() {
        c.report.line(format!("{name:<9} {:<12} {}", num(res.gains[k]), num(TRANSPORT_GAINS_EXPECTED[k])));
    }
    Ok(())
}

fn formation(c: &mut Checks) -> Result<()> {
    let mut table = Vec::new();
    for case in &FORMATION_CASES {
        let prob = formation_problem(&case.b);
        let Some(res) = synthesize(&prob, SynthesisGoal::MinimizeGamma)? else {
            c.check(&format!("{} γ", case.name), false, "LP reported infeasible".into());
            continue;
        };
        let gamma = res.gamma.unwrap_or(f64::NAN);
        c.compare(&format!("{} γ", case.name), case.gamma, gamma, case.gamma_tol);
        let checks = verify_synthesis(&prob, &res)?;
        c.check(&format!("{} verify_synthesis", case.name), checks.pass(), format!("{} checks", checks.checks.len()));
        let achieved = achieved_norm(&prob, &res.gains)?;
        c.compare(&format!("{} achieved 1-induced norm", case.name), gamma, achieved, 1e-6);
        let cl = prob.closed_loop(&res.gains)?;
        let dv = distributed_verify(&cl.a.transpose(), &res.certificate.vector, TimeDomain::Continuous)?;
        c.check(
            &format!("{} cost vector verified node by node", case.name),
            dv.pass && dv.audit.non_neighbour_reads == 0,
            format!("{} messages", dv.audit.total_messages),
        );
        let pattern: Vec<f64> = res.gains.iter().map(|g| if *g > 1e-6 { 1.0 } else { 0.0 }).collect();
        let matches = pattern == case.gains;
        table.push(format!(
            "{:<6} {:<9} {:<10} diag{} {}",
            case.name,
            num(case.gamma),
            num(gamma),
            vec(&res.gains),
            if matches { "(pattern matches)" } else { "(pattern differs; optimum not unique)" }
        ));
    }
    c.report.line(format!("gains ordered {}", FORMATION_GAINS.join(", ")));
    c.report.line("case   γ expected γ here     gains");
    for row in table {
        c.report.line(row);
    }
    Ok(())
}

fn formation_inertial(c: &mut Checks) -> Result<()> {
    let chain = inertial_chain(4, 1.0, 1.0)?;
    let hyp = check_hypotheses(&chain.problem)?;
    c.check("dominance hypotheses", hyp.pass(), format!("{} checks", hyp.checks.len()));
    let Some(res) = synthesize_dominated(&chain.problem)? else {
        c.check("dominated synthesis feasible", false, "LP reported infeasible".into());
        return Ok(());
    };
    let gamma = res.gamma.unwrap_or(f64::NAN);
    c.compare("chain γ", INERTIAL_GAMMA, gamma, 1e-6);
    let checks = verify_dominated(&chain.problem, &res)?;
    c.check("verify_dominated", checks.pass(), format!("{} checks", checks.checks.len()));
    let achieved = dominated_achieved_norm(&chain.problem, &res.gains)?;
    c.compare("achieved H∞ norm", gamma, achieved, 1e-6);
    let links: Vec<String> = chain.links.iter().map(|(i, j)| format!("ℓ{}{}", i + 1, j + 1)).collect();
    c.report.line(format!("springs {} = {}", links.join(", "), vec(&res.gains)));
    Ok(())
}

fn power_flow(c: &mut Checks, net: &PowerNetwork, with_closed_form: bool) -> Result<()> {
    let flow = solve_power_flow(net)?;
    c.report.line(format!(
        "{} nodes, {} lines; primal loss {}, dual loss {}",
        net.num_nodes(),
        net.num_lines(),
        num(flow.primal_loss),
        num(flow.dual_loss)
    ));
    c.report.line(format!("voltages {}", vec(&flow.voltages)));
    c.report.line(format!("line currents {}", vec(&flow.line_currents)));
    c.compare("primal vs dual loss", flow.primal_loss, flow.dual_loss, 1e-3);
    if with_closed_form {
        let exact = two_node_loss(0.3, 0.1, 1.1)?;
        let two = solve_power_flow(&two_node_network(0.3, 0.1, 0.9, 1.1))?;
        c.compare("two-node closed form", exact, two.primal_loss, 1e-6);
    }
    Ok(())
}
