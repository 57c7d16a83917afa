//! Small complex helpers for frequency-response evaluation.

use num_complex::Complex64;

use super::eigen::symmetric_eigen_tol;
use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_real(m: &Matrix) -> Self {
        let data = m.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self { rows: m.rows(), cols: m.cols(), data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Entrywise `self + k·rhs`.
    pub fn add_scaled(&self, k: Complex64, rhs: &CMatrix) -> Result<CMatrix> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} plus {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + k * b).collect();
        Ok(CMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn conj_transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Solves `self · X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.rows != self.cols || rhs.rows != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "solve {}x{} against {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = a.data.iter().fold(0.0_f64, |s, z| s.max(z.norm()));
        for k in 0..n {
            let (piv, mag) = (k..n)
                .map(|i| (i, a.get(i, k).norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if mag <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Singular);
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                for j in 0..m {
                    b.data.swap(k * m + j, piv * m + j);
                }
            }
            let d = a.get(k, k);
            for i in (k + 1)..n {
                let f = a.get(i, k) / d;
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k..n {
                    let v = a.get(k, j);
                    a.data[i * n + j] -= f * v;
                }
                for j in 0..m {
                    let v = b.get(k, j);
                    b.data[i * m + j] -= f * v;
                }
            }
        }
        for k in (0..n).rev() {
            for j in 0..m {
                let mut s = b.get(k, j);
                for l in (k + 1)..n {
                    s -= a.get(k, l) * b.get(l, j);
                }
                b.set(k, j, s / a.get(k, k));
            }
        }
        Ok(b)
    }
}

/// `(z I - A)⁻¹ B` for a complex scalar `z`.
pub fn resolvent_times(a: &Matrix, b: &Matrix, z: Complex64) -> Result<CMatrix> {
    a.require_square()?;
    let n = a.rows();
    let mut m = CMatrix::from_real(&a.scale(-1.0));
    for i in 0..n {
        let v = m.get(i, i) + z;
        m.set(i, i, v);
    }
    m.solve(&CMatrix::from_real(b))
}

/// Largest eigenvalue of a Hermitian matrix via its real symmetric
/// embedding `[[Re, -Im], [Im, Re]]` (eigenvalues appear twice).
pub fn hermitian_lambda_max(h: &CMatrix) -> Result<f64> {
    let n = h.rows();
    if h.cols() != n {
        return Err(Error::NotSquare { rows: n, cols: h.cols() });
    }
    let emb = Matrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h.get(i % n, j % n);
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let scale = emb.max_abs().max(1.0);
    Ok(symmetric_eigen_tol(&emb.symmetrize(), 1e-8 * scale)?.max())
}

/// Largest singular value of a complex matrix.
pub fn sigma_max(g: &CMatrix) -> Result<f64> {
    let gh_g = g.conj_transpose().mul(g)?;
    Ok(hermitian_lambda_max(&gh_g)?.max(0.0).sqrt())
}
