//! Certificates, performance bounds and structured synthesis for positive
//! linear systems.
//!
//! Stability and induced-norm questions for Metzler and nonnegative
//! systems reduce to linear programs over vectors rather than matrices.
//! This crate provides those programs together with the supporting
//! machinery: a simplex solver, rational transfer functions with a
//! dominance test, positive quadratic programming, KYP checks and a
//! message-passing simulator for per-node certificate work.

pub mod cutting_plane;
pub mod distributed;
pub mod error;
pub mod kyp;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod performance;
pub mod posdom;
pub mod power;
pub mod pqp;
pub mod presets;
pub mod synthesis;
pub mod stability;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use stability::TimeDomain;
