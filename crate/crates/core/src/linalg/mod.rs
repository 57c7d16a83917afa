//! Dense linear algebra with sign-structure predicates.

mod complex;
mod eigen;
mod matrix;

pub use complex::{hermitian_lambda_max, resolvent_times, sigma_max, CMatrix};
pub use eigen::{
    is_metzler, lambda_max, metzler_perron, nonneg_inverse_check, perron_pair, rank,
    spectral_abscissa, spectral_radius, symmetric_eigen, symmetric_eigen_tol,
    symmetric_eigenvalues, InverseForm, SymmetricEigen, INVERSE_SIGN_TOL,
};
pub use matrix::{dot, ones, Lu, Matrix, DEFAULT_TOL};
