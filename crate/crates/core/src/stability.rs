//! Linear-programming stability certificates for Metzler and nonnegative
//! matrices, and their per-row verification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, DEFAULT_TOL};
use crate::lp::{LinearProgram, LpStatus};

/// Systems whose spectral abscissa (or `ρ - 1`) lies within this band of
/// zero are reported as marginal.
pub const MARGINAL_BAND: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TimeDomain {
    #[default]
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// `ξ > 0` with `Aξ < 0` (or `Bξ < ξ`).
    PrimalXi,
    /// `z > 0` with `zᵀA < 0` (or `Bᵀz < z`).
    DualZ,
    /// Diagonal of a Lyapunov matrix `P`.
    DiagonalP,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub kind: CertificateKind,
    pub values: Vec<f64>,
    /// Smallest slack achieved by the defining inequalities (for
    /// `DiagonalP`: smallest diagonal entry).
    pub margin: f64,
    pub time_domain: TimeDomain,
}

/// Searches `ξ > 0`, `Aξ < 0` for a Metzler `A`.
pub fn continuous_certificate(a: &Matrix) -> Result<Option<StabilityCertificate>> {
    a.require_metzler(0.0)?;
    Ok(vector_certificate(a, TimeDomain::Continuous)?.map(|(values, margin)| StabilityCertificate {
        kind: CertificateKind::PrimalXi,
        values,
        margin,
        time_domain: TimeDomain::Continuous,
    }))
}

/// Searches `z > 0`, `zᵀA < 0` for a Metzler `A`.
pub fn continuous_dual_certificate(a: &Matrix) -> Result<Option<StabilityCertificate>> {
    a.require_metzler(0.0)?;
    Ok(vector_certificate(&a.transpose(), TimeDomain::Continuous)?.map(|(values, margin)| {
        StabilityCertificate { kind: CertificateKind::DualZ, values, margin, time_domain: TimeDomain::Continuous }
    }))
}

/// Searches `ξ > 0`, `Bξ < ξ` for a nonnegative `B`.
pub fn discrete_certificate(b: &Matrix) -> Result<Option<StabilityCertificate>> {
    b.require_square()?;
    b.require_nonnegative(0.0)?;
    Ok(vector_certificate(b, TimeDomain::Discrete)?.map(|(values, margin)| StabilityCertificate {
        kind: CertificateKind::PrimalXi,
        values,
        margin,
        time_domain: TimeDomain::Discrete,
    }))
}

/// Searches `z > 0`, `Bᵀz < z` for a nonnegative `B`.
pub fn discrete_dual_certificate(b: &Matrix) -> Result<Option<StabilityCertificate>> {
    b.require_square()?;
    b.require_nonnegative(0.0)?;
    Ok(vector_certificate(&b.transpose(), TimeDomain::Discrete)?.map(|(values, margin)| {
        StabilityCertificate { kind: CertificateKind::DualZ, values, margin, time_domain: TimeDomain::Discrete }
    }))
}

/// Margin LP over `ξ` with the normalization `ξ ≤ n·𝟏`.
fn vector_certificate(a: &Matrix, domain: TimeDomain) -> Result<Option<(Vec<f64>, f64)>> {
    let n = a.rows();
    let mut lp = LinearProgram::new(n);
    for i in 0..n {
        let mut row = a.row(i).to_vec();
        if domain == TimeDomain::Discrete {
            row[i] -= 1.0;
        }
        lp.add_lt(&row, 0.0);
    }
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        lp.add_gt(&e, 0.0);
        lp.add_le(&e, n as f64);
    }
    let out = lp.feasibility_with_margin()?;
    Ok(match out.status {
        LpStatus::Optimal => Some((out.y, out.margin)),
        _ => None,
    })
}

/// `P = diag(z ⊘ ξ)`.
pub fn diagonal_lyapunov(xi: &[f64], z: &[f64], domain: TimeDomain) -> Result<StabilityCertificate> {
    if xi.len() != z.len() {
        return Err(Error::DimensionMismatch(format!("ξ has {} entries, z has {}", xi.len(), z.len())));
    }
    if let Some(v) = xi.iter().chain(z).find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidArgument(format!("certificate entries must be positive, found {v}")));
    }
    let values: Vec<f64> = z.iter().zip(xi).map(|(zi, xi)| zi / xi).collect();
    let margin = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(StabilityCertificate { kind: CertificateKind::DiagonalP, values, margin, time_domain: domain })
}

/// `AᵀP + PA` (continuous) or `BᵀPB - P` (discrete) for diagonal `P`.
pub fn lyapunov_form(a: &Matrix, p_diag: &[f64], domain: TimeDomain) -> Result<Matrix> {
    a.require_square()?;
    if p_diag.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "P has {} entries for a {}x{} matrix",
            p_diag.len(),
            a.rows(),
            a.cols()
        )));
    }
    let p = Matrix::from_diag(p_diag);
    Ok(match domain {
        TimeDomain::Continuous => {
            let pa = p.checked_mul(a)?;
            &pa.transpose() + &pa
        }
        TimeDomain::Discrete => &a.transpose().checked_mul(&p)?.checked_mul(a)? - &p,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowCheck {
    pub row: usize,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub rows: Vec<RowCheck>,
    pub pass: bool,
}

/// Evaluates each row inequality of a vector certificate separately.
///
/// A row passes when its slack is positive and the certificate entry is
/// positive.
pub fn verify_rowwise(a: &Matrix, cert: &StabilityCertificate) -> Result<RowReport> {
    a.require_square()?;
    let n = a.rows();
    if cert.values.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "certificate has {} entries for a {n}x{n} matrix",
            cert.values.len()
        )));
    }
    let v = &cert.values;
    let image = match cert.kind {
        CertificateKind::PrimalXi => a.mul_vec(v),
        CertificateKind::DualZ => a.tr_mul_vec(v),
        CertificateKind::DiagonalP => {
            return Err(Error::InvalidArgument("row-wise verification needs a vector certificate".into()))
        }
    };
    let rows: Vec<RowCheck> = (0..n)
        .map(|i| {
            let slack = match cert.time_domain {
                TimeDomain::Continuous => -image[i],
                TimeDomain::Discrete => v[i] - image[i],
            };
            RowCheck { row: i, slack, pass: slack > 0.0 && v[i] > 0.0 }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(RowReport { rows, pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityStatus {
    Stable,
    Unstable,
    Marginal,
}

/// Full stability assessment: spectral oracle, both certificates and the
/// diagonal Lyapunov matrix built from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityAssessment {
    pub status: StabilityStatus,
    pub time_domain: TimeDomain,
    /// Spectral abscissa (continuous) or spectral radius (discrete).
    pub spectral_value: f64,
    pub primal: Option<StabilityCertificate>,
    pub dual: Option<StabilityCertificate>,
    pub lyapunov: Option<StabilityCertificate>,
    /// Largest eigenvalue of the Lyapunov form at `P`, when available.
    pub lyapunov_lambda_max: Option<f64>,
}

pub fn assess(a: &Matrix, domain: TimeDomain) -> Result<StabilityAssessment> {
    let (spectral_value, distance) = match domain {
        TimeDomain::Continuous => {
            let s = linalg::spectral_abscissa(a)?;
            (s, s)
        }
        TimeDomain::Discrete => {
            let r = linalg::spectral_radius(a)?;
            (r, r - 1.0)
        }
    };
    let (primal, dual) = match domain {
        TimeDomain::Continuous => (continuous_certificate(a)?, continuous_dual_certificate(a)?),
        TimeDomain::Discrete => (discrete_certificate(a)?, discrete_dual_certificate(a)?),
    };
    let (lyapunov, lyapunov_lambda_max) = match (&primal, &dual) {
        (Some(p), Some(d)) => {
            let cert = diagonal_lyapunov(&p.values, &d.values, domain)?;
            let form = lyapunov_form(a, &cert.values, domain)?;
            let lmax = linalg::symmetric_eigen_tol(&form, DEFAULT_TOL * form.max_abs().max(1.0))?.max();
            (Some(cert), Some(lmax))
        }
        _ => (None, None),
    };
    let status = if distance.abs() <= MARGINAL_BAND {
        StabilityStatus::Marginal
    } else if primal.is_some() {
        StabilityStatus::Stable
    } else {
        StabilityStatus::Unstable
    };
    Ok(StabilityAssessment { status, time_domain: domain, spectral_value, primal, dual, lyapunov, lyapunov_lambda_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example3_closed_loop() -> Matrix {
        Matrix::from_rows(&[
            [-3.0, 1.0, 0.0, 0.0],
            [0.0, -2.0, 0.0, 0.0],
            [2.0, 1.0, -2.0, 1.0],
            [0.0, 0.0, 2.0, -5.0],
        ])
    }

    fn xi_cert(values: Vec<f64>) -> StabilityCertificate {
        StabilityCertificate {
            kind: CertificateKind::PrimalXi,
            values,
            margin: 0.0,
            time_domain: TimeDomain::Continuous,
        }
    }

    #[test]
    fn negative_identity_has_certificates() {
        let a = Matrix::identity(2).scale(-1.0);
        let c = continuous_certificate(&a).unwrap().unwrap();
        assert!(verify_rowwise(&a, &c).unwrap().pass);
        let d = continuous_dual_certificate(&a).unwrap().unwrap();
        assert!(a.tr_mul_vec(&d.values).iter().all(|v| *v < 0.0));
    }

    #[test]
    fn swap_matrix_is_unstable() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        assert!(continuous_certificate(&a).unwrap().is_none());
        assert!(continuous_dual_certificate(&a).unwrap().is_none());
    }

    #[test]
    fn non_metzler_rejected() {
        let a = Matrix::from_rows(&[[-1.0, -1.0], [0.0, -1.0]]);
        assert!(matches!(continuous_certificate(&a), Err(Error::NotMetzler { .. })));
        assert!(matches!(discrete_certificate(&a), Err(Error::NegativeEntry { .. })));
    }

    #[test]
    fn vehicle_end_dynamics_accept_unit_z() {
        let a = Matrix::from_diag(&[-1.0, -4.0]);
        let z = continuous_dual_certificate(&a).unwrap().unwrap();
        assert!(a.tr_mul_vec(&z.values).iter().all(|v| *v < 0.0));
        let unit = StabilityCertificate { kind: CertificateKind::DualZ, ..xi_cert(vec![1.0, 1.0]) };
        assert!(verify_rowwise(&a, &unit).unwrap().pass);
    }

    #[test]
    fn lyapunov_formula() {
        let p = diagonal_lyapunov(&[1.0, 2.0], &[2.0, 1.0], TimeDomain::Continuous).unwrap();
        assert_eq!(p.values, vec![2.0, 0.5]);
        let p = diagonal_lyapunov(&[1.0, 1.0], &[1.0, 1.0], TimeDomain::Continuous).unwrap();
        assert_eq!(p.values, vec![1.0, 1.0]);
        assert!(diagonal_lyapunov(&[1.0, 0.0], &[1.0, 1.0], TimeDomain::Continuous).is_err());
    }

    #[test]
    fn discrete_examples() {
        let c = discrete_certificate(&Matrix::zeros(3, 3)).unwrap().unwrap();
        assert!(c.values.iter().all(|v| *v > 0.0));
        assert!(discrete_certificate(&Matrix::identity(2)).unwrap().is_none());
    }

    #[test]
    fn example3_rows() {
        let a = example3_closed_loop();
        let report = verify_rowwise(&a, &xi_cert(vec![0.5, 0.5, 1.69, 0.87])).unwrap();
        let expected = [1.0, 1.0, 1.01, 0.97];
        for (r, e) in report.rows.iter().zip(expected) {
            assert!((r.slack - e).abs() < 1e-12, "{} vs {}", r.slack, e);
        }
        assert!(report.pass);

        let ones = verify_rowwise(&a, &xi_cert(vec![1.0; 4])).unwrap();
        assert!(!ones.rows[2].pass);
        assert!(!ones.pass);
    }

    #[test]
    fn example3_lyapunov_cross_construction() {
        let a = example3_closed_loop();
        let z = continuous_dual_certificate(&a).unwrap().unwrap();
        let p = diagonal_lyapunov(&[0.5, 0.5, 1.69, 0.87], &z.values, TimeDomain::Continuous).unwrap();
        let form = lyapunov_form(&a, &p.values, TimeDomain::Continuous).unwrap();
        assert!(linalg::lambda_max(&form).unwrap() < 0.0);
    }

    #[test]
    fn assessment_flags_marginal() {
        let a = Matrix::from_rows(&[[-1.0, 1.0], [1.0, -1.0]]);
        assert_eq!(assess(&a, TimeDomain::Continuous).unwrap().status, StabilityStatus::Marginal);
        let s = assess(&example3_closed_loop(), TimeDomain::Continuous).unwrap();
        assert_eq!(s.status, StabilityStatus::Stable);
        assert!(s.lyapunov_lambda_max.unwrap() < 0.0);
    }

    #[test]
    fn wrong_kind_rejected() {
        let a = Matrix::identity(1).scale(-1.0);
        let p = diagonal_lyapunov(&[1.0], &[1.0], TimeDomain::Continuous).unwrap();
        assert!(verify_rowwise(&a, &p).is_err());
    }
}
