//! Loss minimization in a resistive-inductive transmission network,
//! reduced to a positive quadratic program in the node voltages.
//!
//! Line currents are states, node voltages are inputs:
//! `L ẋ_l = −R x_l + v_from − v_to`. At steady state
//! `x = −A⁻¹Bv`, and every constraint becomes a quadratic form in `v`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pqp::{pqp_dual, pqp_primal, PqpInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerNode {
    /// Upper bound on injected power; negative for a load.
    pub power_bound: f64,
    pub v_min: f64,
    pub v_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLine {
    pub from: usize,
    pub to: usize,
    pub resistance: f64,
    pub inductance: f64,
    /// Bound on the squared voltage difference across the line.
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerNetwork {
    pub nodes: Vec<PowerNode>,
    pub lines: Vec<PowerLine>,
}

/// Parameters shared by every line and node of [`four_node_network`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeskDefaults {
    pub resistance: f64,
    pub inductance: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub capacity: f64,
    pub power_bounds: [f64; 4],
}

impl Default for DeskDefaults {
    fn default() -> Self {
        Self { resistance: 0.1, inductance: 1.0, v_min: 0.9, v_max: 1.1, capacity: 0.5, power_bounds: [1.0, -0.3, -0.3, 1.0] }
    }
}

/// Four nodes with lines 4→1, 2→1, 3→2, 4→2 (zero-based indices).
pub fn four_node_network(p: DeskDefaults) -> PowerNetwork {
    let nodes = p.power_bounds.iter().map(|&b| PowerNode { power_bound: b, v_min: p.v_min, v_max: p.v_max }).collect();
    let lines = [(3, 0), (1, 0), (2, 1), (3, 1)]
        .into_iter()
        .map(|(from, to)| PowerLine { from, to, resistance: p.resistance, inductance: p.inductance, capacity: p.capacity })
        .collect();
    PowerNetwork { nodes, lines }
}

/// Generator (node 0) feeding a load of `demand` (node 1) over one line.
pub fn two_node_network(demand: f64, resistance: f64, v_min: f64, v_max: f64) -> PowerNetwork {
    PowerNetwork {
        nodes: vec![
            PowerNode { power_bound: 10.0, v_min, v_max },
            PowerNode { power_bound: -demand, v_min, v_max },
        ],
        lines: vec![PowerLine { from: 0, to: 1, resistance, inductance: 1.0, capacity: 10.0 }],
    }
}

/// Minimal loss of [`two_node_network`]: the generator sits at `v_max`,
/// the load at the larger root of `v(v_max − v) = demand·R`.
pub fn two_node_loss(demand: f64, resistance: f64, v_max: f64) -> Result<f64> {
    let disc = v_max * v_max - 4.0 * demand * resistance;
    if disc < 0.0 {
        return Err(Error::Infeasible("demand exceeds what the line can carry".into()));
    }
    let v_load = 0.5 * (v_max + disc.sqrt());
    Ok((v_max - v_load).powi(2) / resistance)
}

/// Quadratic constraint `[x; v]ᵀQ[x; v] ≤ bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedConstraint {
    pub label: String,
    pub weight: Matrix,
    pub bound: f64,
}

impl PowerNetwork {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_nodes();
        if n == 0 {
            return Err(Error::InvalidArgument("network has no nodes".into()));
        }
        for (k, node) in self.nodes.iter().enumerate() {
            if !(node.v_min >= 0.0 && node.v_min <= node.v_max && node.v_max.is_finite() && node.power_bound.is_finite()) {
                return Err(Error::InvalidArgument(format!("node {k}: need 0 ≤ v_min ≤ v_max and finite bounds")));
            }
        }
        for (l, line) in self.lines.iter().enumerate() {
            if line.from >= n || line.to >= n || line.from == line.to {
                return Err(Error::InvalidArgument(format!("line {l}: bad endpoints ({}, {})", line.from, line.to)));
            }
            if !(line.resistance > 0.0 && line.inductance > 0.0 && line.capacity > 0.0) {
                return Err(Error::InvalidArgument(format!("line {l}: R, L and capacity must be positive")));
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(k) = stack.pop() {
            for line in &self.lines {
                for (a, b) in [(line.from, line.to), (line.to, line.from)] {
                    if a == k && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("network is not connected".into()));
        }
        Ok(())
    }

    /// `(A, B)` with `A = diag(−R/L)` and `B` the signed incidence over `L`.
    pub fn state_space(&self) -> (Matrix, Matrix) {
        let nl = self.num_lines();
        let a = Matrix::from_diag(&self.lines.iter().map(|l| -l.resistance / l.inductance).collect::<Vec<_>>());
        let mut b = Matrix::zeros(nl, self.num_nodes());
        for (l, line) in self.lines.iter().enumerate() {
            b[(l, line.from)] = 1.0 / line.inductance;
            b[(l, line.to)] = -1.0 / line.inductance;
        }
        (a, b)
    }

    /// Weight of `v_k · i_k` where `i_k` is the current injected at `k`.
    fn injection_weight(&self, k: usize) -> Matrix {
        let nl = self.num_lines();
        let size = nl + self.num_nodes();
        let mut q = Matrix::zeros(size, size);
        for (l, line) in self.lines.iter().enumerate() {
            let sign = if line.from == k {
                1.0
            } else if line.to == k {
                -1.0
            } else {
                continue;
            };
            q[(l, nl + k)] += 0.5 * sign;
            q[(nl + k, l)] += 0.5 * sign;
        }
        q
    }

    /// Total loss `Σ_k v_k i_k` as a weight on `[x; v]`.
    pub fn loss_weight(&self) -> Matrix {
        let mut q = self.injection_weight(0);
        for k in 1..self.num_nodes() {
            q = &q + &self.injection_weight(k);
        }
        q
    }

    /// Power, capacity and voltage constraints, all as `≤` bounds.
    pub fn constraints(&self) -> Vec<WeightedConstraint> {
        let nl = self.num_lines();
        let size = nl + self.num_nodes();
        let mut out = Vec::new();
        for (k, node) in self.nodes.iter().enumerate() {
            out.push(WeightedConstraint {
                label: format!("power at node {}", k + 1),
                weight: self.injection_weight(k),
                bound: node.power_bound,
            });
        }
        for line in &self.lines {
            let mut q = Matrix::zeros(size, size);
            let (j, k) = (nl + line.from, nl + line.to);
            q[(j, j)] = 1.0;
            q[(k, k)] = 1.0;
            q[(j, k)] = -1.0;
            q[(k, j)] = -1.0;
            out.push(WeightedConstraint {
                label: format!("capacity of line {}-{}", line.from + 1, line.to + 1),
                weight: q,
                bound: line.capacity,
            });
        }
        for (k, node) in self.nodes.iter().enumerate() {
            let mut upper = Matrix::zeros(size, size);
            upper[(nl + k, nl + k)] = 1.0;
            let lower = upper.scale(-1.0);
            out.push(WeightedConstraint { label: format!("upper voltage at node {}", k + 1), weight: upper, bound: node.v_max * node.v_max });
            out.push(WeightedConstraint {
                label: format!("lower voltage at node {}", k + 1),
                weight: lower,
                bound: -node.v_min * node.v_min,
            });
        }
        out
    }

    /// `[−A⁻¹B; I]`.
    pub fn steady_state_map(&self) -> Result<Matrix> {
        let (a, b) = self.state_space();
        let top = a.scale(-1.0).solve_matrix(&b)?;
        top.vstack(&Matrix::identity(self.num_nodes()))
    }

    /// Maximize `−loss` subject to every constraint, as a quadratic program
    /// in the node voltages. Each reduced matrix must be Metzler.
    pub fn reduce(&self) -> Result<PqpInstance> {
        self.validate()?;
        let w = self.steady_state_map()?;
        let wt = w.transpose();
        let reduce = |q: &Matrix| (&(&wt * q) * &w).symmetrize();
        let objective = reduce(&self.loss_weight()).scale(-1.0);
        let mut mats = Vec::new();
        let mut bounds = Vec::new();
        for c in self.constraints() {
            let m = reduce(&c.weight).scale(-1.0);
            if let Some((row, col, value)) = m.metzler_violation(1e-12)? {
                return Err(Error::Hypothesis(format!(
                    "{}: reduced matrix has negative off-diagonal entry {value} at ({row}, {col})",
                    c.label
                )));
            }
            mats.push(m);
            bounds.push(-c.bound);
        }
        if let Some((row, col, value)) = objective.metzler_violation(1e-12)? {
            return Err(Error::Hypothesis(format!("loss matrix has negative off-diagonal entry {value} at ({row}, {col})")));
        }
        PqpInstance::new(clean(objective), mats.into_iter().map(clean).collect(), bounds)
    }

    /// Line currents at a constant voltage profile.
    pub fn line_currents(&self, voltages: &[f64]) -> Vec<f64> {
        self.lines.iter().map(|l| (voltages[l.from] - voltages[l.to]) / l.resistance).collect()
    }

    /// `Σ_lines (v_from − v_to)² / R`.
    pub fn loss_at(&self, voltages: &[f64]) -> f64 {
        self.lines.iter().map(|l| (voltages[l.from] - voltages[l.to]).powi(2) / l.resistance).sum()
    }
}

/// Zeroes round-off below the Metzler tolerance on the off-diagonal.
fn clean(m: Matrix) -> Matrix {
    let scale = m.max_abs().max(1.0);
    let n = m.rows();
    Matrix::from_fn(n, n, |i, j| {
        let v = m[(i, j)];
        if i != j && v.abs() <= 1e-12 * scale {
            0.0
        } else {
            v
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFlowReport {
    /// Loss at the primal optimum.
    pub primal_loss: f64,
    /// Loss bound from the dual multipliers.
    pub dual_loss: f64,
    pub gap: f64,
    pub voltages: Vec<f64>,
    pub line_currents: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub labels: Vec<String>,
}

/// Solves the reduced problem from both sides.
pub fn solve_power_flow(net: &PowerNetwork) -> Result<PowerFlowReport> {
    let inst = net.reduce()?;
    let primal = pqp_primal(&inst)?;
    let dual = pqp_dual(&inst)?;
    let primal_loss = -primal.value;
    let dual_loss = -dual.value;
    Ok(PowerFlowReport {
        primal_loss,
        dual_loss,
        gap: (primal_loss - dual_loss).abs(),
        line_currents: net.line_currents(&primal.x),
        voltages: primal.x,
        multipliers: dual.tau,
        labels: net.constraints().into_iter().map(|c| c.label).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_loss_is_laplacian() {
        let net = four_node_network(DeskDefaults::default());
        let inst = net.reduce().unwrap();
        let v = [1.0, 0.95, 1.05, 1.02];
        assert!((inst.objective_at(&v) + net.loss_at(&v)).abs() < 1e-12);
    }

    #[test]
    fn reduced_constraints_match_direct_evaluation() {
        let net = four_node_network(DeskDefaults::default());
        let inst = net.reduce().unwrap();
        let v = [1.0, 0.95, 1.05, 1.02];
        let i = net.line_currents(&v);
        // Injected current at node 2 (index 1): line 2→1 leaves, lines 3→2
        // and 4→2 enter.
        let i2 = i[1] - i[2] - i[3];
        let slacks = inst.constraint_slacks(&v);
        let expect = -(v[1] * i2) + net.nodes[1].power_bound;
        assert!((slacks[1] - expect).abs() < 1e-12);
    }

    #[test]
    fn two_node_closed_form() {
        let loss = two_node_loss(0.3, 0.1, 1.1).unwrap();
        assert!((loss - 0.0078314).abs() < 1e-7, "{loss}");
        let net = two_node_network(0.3, 0.1, 0.9, 1.1);
        let report = solve_power_flow(&net).unwrap();
        assert!((report.primal_loss - loss).abs() < 1e-6, "{}", report.primal_loss);
        assert!((report.dual_loss - loss).abs() < 1e-6, "{}", report.dual_loss);
    }

    #[test]
    fn two_node_grid_oracle() {
        let net = two_node_network(0.3, 0.1, 0.9, 1.1);
        let inst = net.reduce().unwrap();
        let steps = 400;
        let mut best = f64::INFINITY;
        for a in 0..=steps {
            for b in 0..=steps {
                let v = [0.9 + 0.2 * a as f64 / steps as f64, 0.9 + 0.2 * b as f64 / steps as f64];
                if inst.constraint_slacks(&v).iter().all(|s| *s >= 0.0) {
                    best = best.min(net.loss_at(&v));
                }
            }
        }
        let exact = two_node_loss(0.3, 0.1, 1.1).unwrap();
        assert!(best >= exact - 1e-12 && best - exact < 2e-4);
    }

    #[test]
    fn zero_demand_has_zero_loss() {
        let mut p = DeskDefaults::default();
        p.power_bounds = [1.0, 1.0, 1.0, 1.0];
        let report = solve_power_flow(&four_node_network(p)).unwrap();
        assert!(report.primal_loss.abs() < 1e-8);
        assert!(report.dual_loss.abs() < 1e-6);
    }

    #[test]
    fn four_node_primal_matches_dual() {
        let report = solve_power_flow(&four_node_network(DeskDefaults::default())).unwrap();
        assert!(report.gap < 1e-3, "{report:?}");
        assert!(report.primal_loss > 0.0);
        // Loads draw at least their demand.
        let net = four_node_network(DeskDefaults::default());
        let inst = net.reduce().unwrap();
        assert!(inst.constraint_slacks(&report.voltages).iter().all(|s| *s >= -1e-9));
    }

    #[test]
    fn rejects_disconnected() {
        let mut net = four_node_network(DeskDefaults::default());
        net.lines.retain(|l| l.from != 2 && l.to != 2);
        assert!(net.validate().is_err());
    }
}
