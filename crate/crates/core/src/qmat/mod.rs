//! Dense complex linear algebra for small quantum systems.

mod density;
mod eig;
mod linsolve;
mod literal;
mod majorization;
mod matrix;
mod systems;

pub use density::DensityMatrix;
pub use eig::{
    eig_hermitian, pinv_sqrt, positive_projector, psd_sqrt, trace_distance, trace_norm,
    unitarity_error, Spectrum,
};
pub use literal::{parse_matrix, MatrixLiteral};
pub use majorization::{majorizes, majorizes_tol};
pub use matrix::{ComplexMatrix, C64};
pub use systems::{partial_trace, permute_systems};

pub(crate) use linsolve::{cholesky, cholesky_inverse, solve_real};
pub(crate) use matrix::{ONE, ZERO};
pub(crate) use systems::is_permutation;

/// Kronecker product `a (x) b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.tensor(b)
}

pub fn hadamard(a: &ComplexMatrix, b: &ComplexMatrix) -> crate::Result<ComplexMatrix> {
    a.hadamard(b)
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.frobenius_norm()
}

/// Computational basis vector `|i>` in dimension `dim`.
pub fn ket(dim: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[i] = ONE;
    v
}
