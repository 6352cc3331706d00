//! Small dense solvers used by the optimizers.

use super::matrix::{ComplexMatrix, C64, ZERO};

/// Solves `a x = b` for a real square system by Gaussian elimination with
/// partial pivoting. `None` when a pivot vanishes.
pub(crate) fn solve_real(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Lower-triangular Cholesky factor of a Hermitian positive definite
/// matrix; `None` if the matrix is not numerically positive definite.
pub(crate) fn cholesky(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.dim();
    let mut l = ComplexMatrix::zeros(n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Inverse of a Hermitian positive definite matrix from its Cholesky factor.
pub(crate) fn cholesky_inverse(l: &ComplexMatrix) -> ComplexMatrix {
    let n = l.dim();
    // invert L by forward substitution, then A^{-1} = L^{-dagger} L^{-1}
    let mut linv = ComplexMatrix::zeros(n);
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col { C64::new(1.0, 0.0) } else { ZERO };
            for k in col..i {
                s -= l[(i, k)] * linv[(k, col)];
            }
            linv[(i, col)] = s / l[(i, i)];
        }
    }
    linv.adjoint().matmul(&linv)
}
