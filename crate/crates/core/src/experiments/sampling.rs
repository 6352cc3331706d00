//! Deterministic random ensembles.
//!
//! Every task draws from its own ChaCha8 stream: the key comes from the
//! experiment seed and the stream id is the task index, so a sample does
//! not depend on how tasks are scheduled across threads. Normals use the
//! Box-Muller transform on `u64 -> [0, 1)` uniforms with 53-bit mantissas.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::qmat::{eig_hermitian, ComplexMatrix, DensityMatrix, C64};

pub type TaskRng = ChaCha8Rng;

/// Generator for task `task` of the experiment seeded by `seed`.
pub fn task_rng(seed: u64, task: u64) -> TaskRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Uniform in `[0, 1)`.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal pair by Box-Muller.
pub fn normal_pair(rng: &mut impl RngCore) -> (f64, f64) {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let t = std::f64::consts::TAU * u2;
    (r * t.cos(), r * t.sin())
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre_matrix(d: usize, rng: &mut impl RngCore) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, |_, _| {
        let (re, im) = normal_pair(rng);
        C64::new(re, im)
    })
}

/// `G G^dagger / Tr(G G^dagger)` for a Ginibre matrix `G`.
pub fn ginibre_state(d: usize, rng: &mut impl RngCore) -> DensityMatrix {
    let g = ginibre_matrix(d, rng);
    let w = g.matmul(&g.adjoint());
    DensityMatrix::normalized(w).expect("Wishart matrices are positive definite almost surely")
}

/// Probability vector drawn uniformly from the simplex.
pub fn simplex_point(d: usize, rng: &mut impl RngCore) -> Vec<f64> {
    let e: Vec<f64> = (0..d).map(|_| -(1.0 - uniform(rng)).ln()).collect();
    let total: f64 = e.iter().sum();
    e.iter().map(|x| x / total).collect()
}

/// Random incoherent state.
pub fn diagonal_state(d: usize, rng: &mut impl RngCore) -> DensityMatrix {
    DensityMatrix::incoherent(&simplex_point(d, rng)).expect("simplex point")
}

/// Random pure state with Gaussian amplitudes.
pub fn pure_state(d: usize, rng: &mut impl RngCore) -> DensityMatrix {
    let v: Vec<C64> = (0..d)
        .map(|_| {
            let (re, im) = normal_pair(rng);
            C64::new(re, im)
        })
        .collect();
    DensityMatrix::pure(&v).expect("nonzero vector")
}

/// Haar-distributed unitary by Gram-Schmidt on the columns of a Ginibre matrix.
pub fn haar_unitary(d: usize, rng: &mut impl RngCore) -> ComplexMatrix {
    let g = ginibre_matrix(d, rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v: Vec<C64> = (0..d).map(|i| g[(i, j)]).collect();
        for q in &cols {
            let overlap: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= overlap * y;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.iter().map(|x| x / norm).collect());
    }
    ComplexMatrix::from_fn(d, |i, j| cols[j][i])
}

/// Random PSD matrix with unit diagonal: the Gram matrix of `d` random unit
/// vectors in `C^rank`.
pub fn unit_diagonal_psd(d: usize, rank: usize, rng: &mut impl RngCore) -> ComplexMatrix {
    let vecs: Vec<Vec<C64>> = (0..d)
        .map(|_| {
            let v: Vec<C64> = (0..rank)
                .map(|_| {
                    let (re, im) = normal_pair(rng);
                    C64::new(re, im)
                })
                .collect();
            let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
        .collect();
    let mut c = ComplexMatrix::from_fn(d, |i, j| {
        vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b.conj()).sum()
    });
    for i in 0..d {
        c[(i, i)] = C64::new(1.0, 0.0);
    }
    c
}

/// Smallest eigenvalue, for diagnostics.
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    eig_hermitian(m).map(|s| s.min()).unwrap_or(f64::NAN)
}
