//! Cyclic Jacobi eigensolver for complex Hermitian matrices and the
//! spectral functions built on it.

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};
use crate::DEFAULT_TOL;

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TARGET: f64 = 1e-12;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending,
/// eigenvectors stored as the columns of `eigenvectors`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        let n = self.eigenvalues.len();
        (0..n).map(|i| self.eigenvectors[(i, k)]).collect()
    }

    /// `V f(Lambda) V^dagger`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .filter(|&k| fl[k] != 0.0)
                .map(|k| v[(i, k)] * v[(j, k)].conj() * fl[k])
                .sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| l)
    }

    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Diagonalizes a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<Spectrum> {
    let scale = a.frobenius_norm().max(1.0);
    let deviation = a.hermiticity_error();
    if deviation > DEFAULT_TOL * scale {
        return Err(Error::NotHermitian { deviation });
    }
    a.check_finite()?;
    let n = a.dim();
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let target = OFF_DIAGONAL_TARGET * a.frobenius_norm();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > target {
        return Err(Error::NotConverged {
            what: "Jacobi eigensolver",
            iterations: MAX_SWEEPS,
            best: off_diagonal_norm(&m),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let eigenvalues = order.iter().map(|&k| m[(k, k)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// One Jacobi rotation annihilating `m[p][q]`; `m <- G^dagger m G`, `v <- v G`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // negligible against the diagonal: zero it without rotating
    if mag < 1e-300 || (mag * 1e18 < app.abs() && mag * 1e18 < aqq.abs()) {
        m[(p, q)] = ZERO;
        m[(q, p)] = ZERO;
        return;
    }
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = m.dim();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * g_pp + mkq * g_qp;
        m[(k, q)] = mkp * g_pq + mkq * g_qq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = g_pp.conj() * mpk + g_qp.conj() * mqk;
        m[(q, k)] = g_pq.conj() * mpk + g_qq.conj() * mqk;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
}

/// Sum of singular values.
///
/// Hermitian arguments use `sum |lambda|`; anything else goes through the
/// eigenvalues of `a^dagger a`.
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return 0.0;
    }
    if a.hermiticity_error() <= 1e-14 * scale {
        let spectrum = eig_hermitian(a).expect("Hermitian input to eigensolver");
        return spectrum.eigenvalues.iter().map(|l| l.abs()).sum();
    }
    let gram = a.adjoint().matmul(a);
    let spectrum = eig_hermitian(&gram).expect("Gram matrix is Hermitian");
    spectrum.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum()
}

/// Half the trace norm of the difference.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    0.5 * trace_norm(&(a - b))
}

/// Moore-Penrose inverse square root of a PSD matrix; eigenvalues below
/// `cutoff * lambda_max` are treated as zero.
pub fn pinv_sqrt(a: &ComplexMatrix, cutoff: f64) -> Result<ComplexMatrix> {
    let spectrum = eig_hermitian(a)?;
    let top = spectrum.max().max(0.0);
    Ok(spectrum.map(|l| if l > cutoff * top && l > 0.0 { 1.0 / l.sqrt() } else { 0.0 }))
}

/// Principal square root of a PSD matrix (negative rounding clamped).
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spectrum = eig_hermitian(a)?;
    Ok(spectrum.map(|l| l.max(0.0).sqrt()))
}

/// Projector onto the strictly positive eigenspace.
pub fn positive_projector(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spectrum = eig_hermitian(a)?;
    Ok(spectrum.map(|l| if l > 0.0 { 1.0 } else { 0.0 }))
}

/// `||V^dagger V - I||_F`.
pub fn unitarity_error(v: &ComplexMatrix) -> f64 {
    (&v.adjoint().matmul(v) - &ComplexMatrix::identity(v.dim())).frobenius_norm()
}
