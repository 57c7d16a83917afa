//! Splitting an NSD symmetric Metzler matrix into edge-local 2×2 blocks.
//!
//! On each connected component the Perron vector `ξ` of `M` fixes the
//! diagonal split of edge `(k,l)` as `d_k = M_kl ξ_l/ξ_k`,
//! `d_l = M_kl ξ_k/ξ_l`, so `d_k d_l = M_kl²` exactly. The leftover
//! `−λ_max ≥ 0` on each diagonal is spread over that node's edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lambda_max, metzler_perron, Matrix};

/// Largest admissible eigenvalue of the input and of every block.
pub const NSD_TOL: f64 = 1e-9;

/// `[[−d_k, m], [m, −d_l]]` placed at rows/columns `(k, l)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsdBlock {
    pub k: usize,
    pub l: usize,
    pub block: [[f64; 2]; 2],
}

impl NsdBlock {
    pub fn lambda_max(&self) -> f64 {
        let [[a, b], [_, d]] = self.block;
        let mean = 0.5 * (a + d);
        let half = 0.5 * (a - d);
        mean + (half * half + b * b).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsdDecomposition {
    pub size: usize,
    /// One block per nonzero above-diagonal entry.
    pub blocks: Vec<NsdBlock>,
    /// `(i, M_ii)` for nodes without off-diagonal entries.
    pub isolated: Vec<(usize, f64)>,
}

impl NsdDecomposition {
    /// Sum of the embedded blocks and isolated diagonals.
    pub fn reconstruct(&self) -> Matrix {
        let mut m = Matrix::zeros(self.size, self.size);
        for b in &self.blocks {
            m[(b.k, b.k)] += b.block[0][0];
            m[(b.k, b.l)] += b.block[0][1];
            m[(b.l, b.k)] += b.block[1][0];
            m[(b.l, b.l)] += b.block[1][1];
        }
        for &(i, v) in &self.isolated {
            m[(i, i)] += v;
        }
        m
    }

    pub fn max_block_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(NsdBlock::lambda_max)
            .chain(self.isolated.iter().map(|(_, v)| *v))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Decomposes a negative semidefinite symmetric Metzler matrix.
pub fn nsd_decompose(m: &Matrix) -> Result<NsdDecomposition> {
    m.require_square()?;
    let asym = m.asymmetry();
    if asym > 1e-12 * m.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    m.require_metzler(0.0)?;
    let n = m.rows();
    if n == 0 {
        return Ok(NsdDecomposition { size: 0, blocks: vec![], isolated: vec![] });
    }
    let top = lambda_max(m)?;
    if top > NSD_TOL {
        return Err(Error::NotNegativeSemidefinite(top));
    }
    let neighbours: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| j != i && m[(i, j)] != 0.0).collect()).collect();
    for i in 0..n {
        if !neighbours[i].is_empty() && m[(i, i)] >= 0.0 {
            return Err(Error::Hypothesis(format!(
                "row {i} has off-diagonal entries but diagonal {} is not negative",
                m[(i, i)]
            )));
        }
    }

    let mut xi = vec![0.0; n];
    for comp in components(&neighbours) {
        if comp.len() == 1 {
            xi[comp[0]] = 1.0;
            continue;
        }
        let sub = Matrix::from_fn(comp.len(), comp.len(), |a, b| m[(comp[a], comp[b])]);
        let (_, v) = metzler_perron(&sub)?;
        for (a, &i) in comp.iter().enumerate() {
            if !(v[a] > 0.0) {
                return Err(Error::NoConvergence { what: "Perron vector of a connected component", iterations: 0 });
            }
            xi[i] = v[a];
        }
    }

    // Raw per-edge allocations from the Perron vector.
    let mut alloc: Vec<(usize, usize, f64, f64)> = Vec::new();
    for k in 0..n {
        for &l in neighbours[k].iter().filter(|&&l| l > k) {
            let mkl = m[(k, l)];
            alloc.push((k, l, mkl * xi[l] / xi[k], mkl * xi[k] / xi[l]));
        }
    }
    let mut used = vec![0.0; n];
    for &(k, l, dk, dl) in &alloc {
        used[k] += dk;
        used[l] += dl;
    }
    // Rebalance each node to its budget −M_kk.
    let mut surplus = vec![0.0; n];
    let mut shrink = vec![1.0; n];
    for i in 0..n {
        if neighbours[i].is_empty() {
            continue;
        }
        let budget = -m[(i, i)];
        if used[i] <= budget {
            surplus[i] = (budget - used[i]) / neighbours[i].len() as f64;
        } else {
            shrink[i] = budget / used[i];
        }
    }
    let blocks: Vec<NsdBlock> = alloc
        .into_iter()
        .map(|(k, l, dk, dl)| {
            let dk = dk * shrink[k] + surplus[k];
            let dl = dl * shrink[l] + surplus[l];
            NsdBlock { k, l, block: [[-dk, m[(k, l)]], [m[(k, l)], -dl]] }
        })
        .collect();
    let isolated = (0..n).filter(|&i| neighbours[i].is_empty()).map(|i| (i, m[(i, i)])).collect();
    Ok(NsdDecomposition { size: n, blocks, isolated })
}

fn components(neighbours: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = neighbours.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for &w in &neighbours[v] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
