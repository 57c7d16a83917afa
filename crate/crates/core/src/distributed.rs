//! Message-passing simulation of per-node certificate search and
//! verification over the sparsity graph of a Metzler matrix.
//!
//! Node `i` owns `ξ_i`, its diagonal entry `A_ii` and the coefficients
//! `A_ij` of its in-neighbours. Each synchronous round every node sends
//! its value along its out-edges, then updates from its inbox. Only the
//! convergence monitor sees all nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::stability::TimeDomain;

/// Node values are rescaled by a common factor once their magnitude
/// leaves `[1/RESCALE_AT, RESCALE_AT]`; certificates are scale free.
const RESCALE_AT: f64 = 1e150;

/// Directed graph with an edge `(i, j)` whenever `A_ij ≠ 0`, `i ≠ j`:
/// node `i` listens to node `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn from_matrix(a: &Matrix) -> Result<Self> {
        a.require_square()?;
        let n = a.rows();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && a[(i, j)] != 0.0 {
                    edges.push((i, j));
                }
            }
        }
        Ok(Self { nodes: n, edges })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// For each node, the nodes it sends to.
    fn out_neighbours(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes];
        for &(i, j) in &self.edges {
            out[j].push(i);
        }
        out
    }
}

/// Counters proving which data the nodes touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AccessAudit {
    /// Inbox values read from in-neighbours.
    pub neighbour_reads: u64,
    /// Inbox values a node could not match to its own row.
    pub non_neighbour_reads: u64,
    pub rounds: u64,
    pub total_messages: u64,
    pub min_messages_per_round: u64,
    pub max_messages_per_round: u64,
}

impl AccessAudit {
    fn record_round(&mut self, messages: u64) {
        if self.rounds == 0 {
            self.min_messages_per_round = messages;
            self.max_messages_per_round = messages;
        } else {
            self.min_messages_per_round = self.min_messages_per_round.min(messages);
            self.max_messages_per_round = self.max_messages_per_round.max(messages);
        }
        self.rounds += 1;
        self.total_messages += messages;
    }
}

/// Local state of one node.
#[derive(Debug, Clone)]
struct Node {
    xi: f64,
    diag: f64,
    /// `(j, A_ij)` for every in-neighbour `j`.
    incoming: Vec<(usize, f64)>,
    inbox: Vec<(usize, f64)>,
}

impl Node {
    /// `A_i ξ` from the node's own value and its inbox.
    fn row_value(&self, audit: &mut AccessAudit) -> f64 {
        let mut s = self.diag * self.xi;
        for &(from, value) in &self.inbox {
            match self.incoming.iter().find(|(j, _)| *j == from) {
                Some((_, coeff)) => {
                    audit.neighbour_reads += 1;
                    s += coeff * value;
                }
                None => audit.non_neighbour_reads += 1,
            }
        }
        s
    }
}

struct Network {
    nodes: Vec<Node>,
    out: Vec<Vec<usize>>,
    audit: AccessAudit,
}

impl Network {
    fn new(a: &Matrix, xi0: &[f64]) -> Result<Self> {
        let topo = Topology::from_matrix(a)?;
        let n = topo.nodes;
        let mut nodes: Vec<Node> = (0..n)
            .map(|i| Node { xi: xi0[i], diag: a[(i, i)], incoming: Vec::new(), inbox: Vec::new() })
            .collect();
        for &(i, j) in &topo.edges {
            nodes[i].incoming.push((j, a[(i, j)]));
        }
        Ok(Self { nodes, out: topo.out_neighbours(), audit: AccessAudit::default() })
    }

    /// Every node sends its current value along its out-edges.
    fn exchange(&mut self) {
        for node in &mut self.nodes {
            node.inbox.clear();
        }
        let mut messages = 0u64;
        for j in 0..self.nodes.len() {
            let value = self.nodes[j].xi;
            for &i in &self.out[j] {
                self.nodes[i].inbox.push((j, value));
                messages += 1;
            }
        }
        self.audit.record_round(messages);
    }

    fn row_values(&mut self) -> Vec<f64> {
        let audit = &mut self.audit;
        self.nodes.iter().map(|node| node.row_value(audit)).collect()
    }

    fn values(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.xi).collect()
    }
}

/// One line of the round-by-round trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub round: usize,
    pub node: usize,
    pub xi: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateOptions {
    /// Euler step; must satisfy `h ≤ 0.5 / max |A_ii|`.
    pub step: f64,
    /// Target slack: stop once `−A_iξ ≥ δ ξ_i` at every node.
    pub delta: f64,
    pub max_rounds: usize,
    /// Positive start; all ones when `None`.
    pub initial: Option<Vec<f64>>,
    pub record_trace: bool,
}

impl CertificateOptions {
    pub fn new(step: f64, delta: f64, max_rounds: usize) -> Self {
        Self { step, delta, max_rounds, initial: None, record_trace: false }
    }
}

/// Largest admissible Euler step, `0.5 / max |A_ii|`.
pub fn max_step(a: &Matrix) -> f64 {
    let d = a.diag().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if d > 0.0 {
        0.5 / d
    } else {
        0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRun {
    pub status: RunStatus,
    /// Final node values (a certificate when converged).
    pub xi: Vec<f64>,
    /// Update rounds performed.
    pub rounds: usize,
    /// `−A_iξ` at the final values.
    pub slacks: Vec<f64>,
    pub audit: AccessAudit,
    pub trace: Vec<TraceRecord>,
}

/// Distributed Euler iteration `ξ ← ξ + h·Aξ` until every node sees its
/// target slack, or `max_rounds` rounds have passed.
pub fn distributed_certificate(a: &Matrix, step: f64, delta: f64, max_rounds: usize) -> Result<CertificateRun> {
    distributed_certificate_with(a, &CertificateOptions::new(step, delta, max_rounds))
}

pub fn distributed_certificate_with(a: &Matrix, opts: &CertificateOptions) -> Result<CertificateRun> {
    a.require_square()?;
    a.require_metzler(0.0)?;
    let n = a.rows();
    let limit = max_step(a);
    if !(opts.step > 0.0 && opts.step <= limit * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!("step {} outside (0, {limit}]", opts.step)));
    }
    if !(opts.delta > 0.0) {
        return Err(Error::InvalidArgument(format!("target slack {} must be positive", opts.delta)));
    }
    let xi0 = match &opts.initial {
        Some(v) if v.len() != n => {
            return Err(Error::DimensionMismatch(format!("start has {} entries, expected {n}", v.len())))
        }
        Some(v) if v.iter().any(|x| !(*x > 0.0 && x.is_finite())) => {
            return Err(Error::InvalidArgument("start values must be positive".into()))
        }
        Some(v) => v.clone(),
        None => vec![1.0; n],
    };
    let mut net = Network::new(a, &xi0)?;
    let mut trace = Vec::new();
    let mut round = 0;
    loop {
        net.exchange();
        let rows = net.row_values();
        let slacks: Vec<f64> = rows.iter().map(|r| -r).collect();
        if opts.record_trace {
            for (i, node) in net.nodes.iter().enumerate() {
                trace.push(TraceRecord { round, node: i, xi: node.xi, slack: slacks[i] });
            }
        }
        // Convergence monitor.
        let done = net.nodes.iter().zip(&slacks).all(|(node, s)| node.xi > 0.0 && *s >= opts.delta * node.xi);
        if done || round >= opts.max_rounds {
            let status = if done { RunStatus::Converged } else { RunStatus::Timeout };
            return Ok(CertificateRun { status, xi: net.values(), rounds: round, slacks, audit: net.audit, trace });
        }
        for (node, r) in net.nodes.iter_mut().zip(&rows) {
            node.xi += opts.step * r;
        }
        let top = net.nodes.iter().fold(0.0f64, |m, node| m.max(node.xi.abs()));
        if top > RESCALE_AT || (top > 0.0 && top < 1.0 / RESCALE_AT) {
            for node in &mut net.nodes {
                node.xi /= top;
            }
        }
        round += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeVerdict {
    pub node: usize,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub nodes: Vec<NodeVerdict>,
    pub pass: bool,
    pub audit: AccessAudit,
}

/// Each node checks its own row inequality (`A_iξ < 0`, or `A_iξ < ξ_i`
/// in discrete time) after one exchange.
pub fn distributed_verify(a: &Matrix, xi: &[f64], domain: TimeDomain) -> Result<VerifyReport> {
    a.require_square()?;
    let n = a.rows();
    if xi.len() != n {
        return Err(Error::DimensionMismatch(format!("ξ has {} entries, expected {n}", xi.len())));
    }
    let mut net = Network::new(a, xi)?;
    net.exchange();
    let rows = net.row_values();
    let nodes: Vec<NodeVerdict> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let slack = match domain {
                TimeDomain::Continuous => -r,
                TimeDomain::Discrete => xi[i] - r,
            };
            NodeVerdict { node: i, slack, pass: slack > 0.0 && xi[i] > 0.0 }
        })
        .collect();
    let pass = nodes.iter().all(|v| v.pass);
    Ok(VerifyReport { nodes, pass, audit: net.audit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{buffer_network, BufferRates, TRANSPORT_XI};
    use crate::stability::{verify_rowwise, CertificateKind, StabilityCertificate};

    #[test]
    fn identity_stops_at_round_zero() {
        let a = Matrix::from_diag(&[-1.0, -1.0, -1.0]);
        let run = distributed_certificate(&a, 0.5, 0.5, 10).unwrap();
        assert_eq!(run.status, RunStatus::Converged);
        assert_eq!(run.rounds, 0);
        assert_eq!(run.slacks, vec![1.0; 3]);
        assert_eq!(run.audit.total_messages, 0);
    }

    #[test]
    fn buffer_network_converges() {
        let a = buffer_network(BufferRates::default());
        let run = distributed_certificate(&a, max_step(&a), 1e-6, 100_000).unwrap();
        assert_eq!(run.status, RunStatus::Converged);
        let cert = StabilityCertificate {
            kind: CertificateKind::PrimalXi,
            values: run.xi.clone(),
            margin: 0.0,
            time_domain: TimeDomain::Continuous,
        };
        assert!(verify_rowwise(&a, &cert).unwrap().pass);
        let edges = Topology::from_matrix(&a).unwrap().edge_count() as u64;
        assert_eq!(run.audit.min_messages_per_round, edges);
        assert_eq!(run.audit.max_messages_per_round, edges);
        assert_eq!(run.audit.non_neighbour_reads, 0);
    }

    #[test]
    fn unstable_times_out() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let run = distributed_certificate(&a, 0.5, 1e-9, 1000).unwrap();
        assert_eq!(run.status, RunStatus::Timeout);
        assert_eq!(run.rounds, 1000);
    }

    #[test]
    fn step_limit_enforced() {
        let a = Matrix::from_diag(&[-2.0]);
        assert!(distributed_certificate(&a, 0.3, 1e-3, 10).is_err());
        assert!(distributed_certificate(&a, 0.25, 1e-3, 10).is_ok());
    }

    #[test]
    fn long_runs_do_not_underflow() {
        let a = Matrix::from_rows(&[[-1.0, 0.0], [0.0, -1e-3]]);
        let opts = CertificateOptions { initial: Some(vec![1.0, 1e-300]), ..CertificateOptions::new(0.5, 0.9, 50_000) };
        let run = distributed_certificate_with(&a, &opts).unwrap();
        assert_eq!(run.status, RunStatus::Timeout);
        assert!(run.xi.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn controlled_transport_point_verifies() {
        let a = buffer_network(BufferRates::default());
        let report = distributed_verify(&a, &TRANSPORT_XI, TimeDomain::Continuous).unwrap();
        assert!(report.pass);
        let slacks: Vec<f64> = report.nodes.iter().map(|v| v.slack).collect();
        let expect = [1.0, 1.0, 1.01, 0.97];
        for (s, e) in slacks.iter().zip(expect) {
            assert!((s - e).abs() < 1e-12, "{s} vs {e}");
        }
    }

    #[test]
    fn perturbed_point_fails_locally() {
        let a = buffer_network(BufferRates::default());
        let mut xi = TRANSPORT_XI;
        xi[2] = 0.1;
        let report = distributed_verify(&a, &xi, TimeDomain::Continuous).unwrap();
        assert!(!report.pass);
        assert!(!report.nodes[2].pass);
        assert!(report.nodes[0].pass && report.nodes[1].pass && report.nodes[3].pass);
        assert_eq!(report.audit.non_neighbour_reads, 0);
    }

    #[test]
    fn single_node() {
        let report = distributed_verify(&Matrix::from_rows(&[[-1.0]]), &[1.0], TimeDomain::Continuous).unwrap();
        assert!(report.pass);
        assert_eq!(report.nodes[0].slack, 1.0);
    }

    #[test]
    fn trace_records_every_node() {
        let a = Matrix::from_rows(&[[-1.0, 0.5], [0.2, -2.0]]);
        let mut opts = CertificateOptions::new(0.25, 0.4, 100);
        opts.record_trace = true;
        let run = distributed_certificate_with(&a, &opts).unwrap();
        assert_eq!(run.trace.len(), 2 * (run.rounds + 1));
        assert_eq!(run.trace.last().unwrap().round, run.rounds);
    }
}
