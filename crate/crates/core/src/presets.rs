//! Ready-made instances: the buffer network, its controlled variant and
//! the vehicle formation.

use crate::linalg::Matrix;
use crate::performance::Direction;
use crate::synthesis::SynthesisProblem;

/// Transfer rates of the four-buffer network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BufferRates {
    pub l31: f64,
    pub l12: f64,
    pub l32: f64,
    pub l23: f64,
    pub l34: f64,
    pub l43: f64,
}

impl Default for BufferRates {
    fn default() -> Self {
        Self { l31: 2.0, l12: 1.0, l32: 1.0, l23: 0.0, l34: 1.0, l43: 2.0 }
    }
}

/// Dynamics matrix of the four-buffer transportation network.
pub fn buffer_network(r: BufferRates) -> Matrix {
    Matrix::from_rows(&[
        [-1.0 - r.l31, r.l12, 0.0, 0.0],
        [0.0, -r.l12 - r.l32, r.l23, 0.0],
        [r.l31, r.l32, -r.l23 - r.l43, r.l34],
        [0.0, 0.0, r.l43, -4.0 - r.l34],
    ])
}

/// Names of the tunable rates in [`transport_problem`], in gain order.
pub const TRANSPORT_GAINS: [&str; 3] = ["l12", "l32", "l23"];

/// Buffer network with `ℓ31 = 2`, `ℓ34 = 1`, `ℓ43 = 2` fixed and
/// `(ℓ12, ℓ32, ℓ23) ∈ [0,1]³` to be chosen. No performance channel.
pub fn transport_problem() -> SynthesisProblem {
    let a = Matrix::from_rows(&[
        [-3.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [2.0, 0.0, -2.0, 1.0],
        [0.0, 0.0, 2.0, -5.0],
    ]);
    let e = Matrix::from_rows(&[[1.0, 0.0, 0.0], [-1.0, -1.0, 1.0], [0.0, 1.0, -1.0], [0.0, 0.0, 0.0]]);
    let f = Matrix::from_rows(&[[0.0, 1.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]);
    SynthesisProblem::new(
        a,
        Matrix::zeros(4, 1),
        Matrix::zeros(0, 4),
        Matrix::zeros(0, 1),
        e,
        f,
        Matrix::zeros(0, 3),
        Matrix::zeros(3, 1),
        Direction::Linf,
    )
    .expect("static dimensions")
}

/// Published feasible point for [`transport_problem`]: `(ξ, μ)`.
pub const TRANSPORT_XI: [f64; 4] = [0.5, 0.5, 1.69, 0.87];
pub const TRANSPORT_MU: [f64; 3] = [0.5, 0.5, 0.0];
/// Gains `(ℓ12, ℓ32, ℓ23)` that the published point encodes.
pub const TRANSPORT_GAINS_EXPECTED: [f64; 3] = [1.0, 1.0, 0.0];

/// Names of the formation gains, in order.
pub const FORMATION_GAINS: [&str; 6] = ["l13", "l21", "l23", "l32", "l34", "l43"];

/// Vehicle formation with disturbance weights `b` (one per vehicle),
/// performance output `𝟏ᵀx`, gains `ℓij ∈ [0,1]`, 1-induced direction.
pub fn formation_problem(b: &[f64; 4]) -> SynthesisProblem {
    let a = Matrix::from_diag(&[-1.0, 0.0, 0.0, -4.0]);
    let e = Matrix::from_rows(&[
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    ]);
    let f = Matrix::from_rows(&[
        [-1.0, 0.0, 1.0, 0.0],
        [1.0, -1.0, 0.0, 0.0],
        [0.0, -1.0, 1.0, 0.0],
        [0.0, 1.0, -1.0, 0.0],
        [0.0, 0.0, -1.0, 1.0],
        [0.0, 0.0, 1.0, -1.0],
    ]);
    SynthesisProblem::new(
        a,
        Matrix::column(b),
        Matrix::row_vector(&[1.0; 4]),
        Matrix::zeros(1, 1),
        e,
        f,
        Matrix::zeros(1, 6),
        Matrix::zeros(6, 1),
        Direction::L1,
    )
    .expect("static dimensions")
}

/// Formation cases with their published optimal γ and gain pattern.
pub struct FormationCase {
    pub name: &'static str,
    pub b: [f64; 4],
    pub gamma: f64,
    pub gamma_tol: f64,
    pub gains: [f64; 6],
}

pub const FORMATION_CASES: [FormationCase; 3] = [
    FormationCase { name: "unit", b: [1.0, 1.0, 1.0, 1.0], gamma: 4.125, gamma_tol: 1e-6, gains: [0.0, 1.0, 1.0, 0.0, 1.0, 0.0] },
    FormationCase { name: "front", b: [10.0, 10.0, 1.0, 1.0], gamma: 15.562, gamma_tol: 1e-3, gains: [1.0, 1.0, 1.0, 0.0, 1.0, 0.0] },
    FormationCase { name: "rear", b: [1.0, 1.0, 10.0, 10.0], gamma: 12.750, gamma_tol: 1e-3, gains: [0.0, 1.0, 0.0, 1.0, 1.0, 0.0] },
];
