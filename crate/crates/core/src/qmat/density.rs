use std::ops::Deref;

use super::eig::eig_hermitian;
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};
use crate::DEFAULT_TOL;

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    tol: f64,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tol(mat, DEFAULT_TOL)
    }

    /// Validates `mat` within `tol`.
    ///
    /// The stored matrix is the Hermitian part of the input; eigenvalues in
    /// `(-tol, 0)` are clamped to zero.
    pub fn with_tol(mat: ComplexMatrix, tol: f64) -> Result<Self> {
        mat.check_finite()?;
        let deviation = mat.hermiticity_error();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        let mat = mat.hermitian_part();
        let trace = mat.trace().re;
        if (trace - 1.0).abs() > tol {
            return Err(Error::TraceNotOne { trace });
        }
        let spectrum = eig_hermitian(&mat)?;
        let min = spectrum.min();
        if min < -tol {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        let mat = if min < 0.0 {
            spectrum.map(|l| l.max(0.0))
        } else {
            mat
        };
        Ok(Self { mat, tol })
    }

    /// Renormalizes a nonzero PSD matrix to unit trace before validating.
    pub fn normalized(mat: ComplexMatrix) -> Result<Self> {
        let t = mat.trace().re;
        if !(t > 0.0) {
            return Err(Error::TraceNotOne { trace: t });
        }
        Self::new(mat.scale_real(1.0 / t))
    }

    /// Pure state `|v><v| / <v|v>`.
    pub fn pure(v: &[C64]) -> Result<Self> {
        Self::normalized(ComplexMatrix::projector(v))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
            tol: DEFAULT_TOL,
        }
    }

    /// The maximally coherent state `|phi+><phi+|` with uniform amplitudes.
    pub fn maximally_coherent(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::ones(dim).scale_real(1.0 / dim as f64),
            tol: DEFAULT_TOL,
        }
    }

    /// Diagonal (incoherent) state from a probability vector.
    pub fn incoherent(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::diag_real(probs))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.tensor(&other.mat),
            tol: self.tol.max(other.tol),
        }
    }

    pub fn tensor_power(&self, n: usize) -> Self {
        Self {
            mat: self.mat.tensor_power(n),
            tol: self.tol,
        }
    }

    /// Purity `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.mat[(i, j)].norm_sqr();
            }
        }
        acc
    }

    /// True when every off-diagonal entry is below `tol` in modulus.
    pub fn is_incoherent(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.mat[(i, j)].norm() <= tol))
    }
}

impl Deref for DensityMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.mat
    }
}

impl AsRef<ComplexMatrix> for DensityMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.mat
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::trace_norm;

    #[test]
    fn validation_failures() {
        let not_herm = ComplexMatrix::from_real_rows(&[vec![0.5, 0.3], vec![0.0, 0.5]]).unwrap();
        assert!(matches!(DensityMatrix::new(not_herm), Err(Error::NotHermitian { .. })));
        let bad_trace = ComplexMatrix::diag_real(&[0.5, 0.6]);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::TraceNotOne { .. })));
        let negative = ComplexMatrix::diag_real(&[1.2, -0.2]);
        assert!(matches!(DensityMatrix::new(negative), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn clamps_tiny_negative_eigenvalues() {
        let m = ComplexMatrix::diag_real(&[1.0 + 1e-11, -1e-11]);
        let rho = DensityMatrix::new(m).unwrap();
        assert!(rho[(1, 1)].re >= 0.0);
    }

    #[test]
    fn trace_norm_of_state_is_one() {
        let rho = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.3, -0.8), C64::new(0.0, 0.5)])
            .unwrap();
        assert!((trace_norm(&rho) - 1.0).abs() < 1e-12);
    }
}
