//! Positively dominated transfer functions: `|G(iω)| ≤ G(0)` entrywise.

mod poly;
mod rational;
mod synth;

pub use poly::Poly;
pub use rational::{
    feedback_wellposed, hinf_norm_dominated, matrix_dominance_witness, matrix_dominated, tf_add, tf_combine,
    tf_mul, FeedbackLoop, RationalFunction, RationalTransferMatrix, TfStability, AXIS_TOL, DOMINANCE_TOL, GCD_TOL,
};
pub use synth::{
    check_hypotheses, dominated_achieved_norm, inertial_chain, static_closed_loop, static_loop,
    synthesize_dominated, verify_dominated, DominatedProblem, InertialChain, StaticData, MAX_VERTEX_GAINS,
};

/// Stability verdict of a scalar rational function.
pub fn tf_stable(f: &RationalFunction) -> TfStability {
    f.stability()
}

/// Exact test of `|f(iω)| ≤ f(0)` for all real `ω`.
pub fn is_positively_dominated(f: &RationalFunction) -> crate::Result<bool> {
    f.is_positively_dominated()
}
