//! Multipartite bookkeeping: partial traces and register permutations.
//!
//! Subsystems are ordered left to right and composite indices are
//! row-major, so for dims `[d0, d1, d2]` the basis label `(a, b, c)` sits at
//! `(a * d1 + b) * d2 + c`.

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

fn check_dims(m: &ComplexMatrix, dims: &[usize]) -> Result<()> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != m.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {dims:?} do not multiply to {}",
            m.dim()
        )));
    }
    Ok(())
}

fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Reduced matrix on the subsystems in `keep` (taken in ascending order).
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    check_dims(m, dims)?;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "invalid kept subsystems {keep:?} for {} subsystems",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = keep_dims.iter().product();
    let env_dim: usize = traced_dims.iter().product();

    // full index for each (kept, traced) pair
    let n = dims.len();
    let mut full = vec![0usize; n];
    let mut kd = vec![0usize; keep.len()];
    let mut td = vec![0usize; traced.len()];
    let mut index = vec![0usize; out_dim * env_dim];
    for a in 0..out_dim {
        digits(a, &keep_dims, &mut kd);
        for e in 0..env_dim {
            digits(e, &traced_dims, &mut td);
            for (slot, &k) in keep.iter().enumerate() {
                full[k] = kd[slot];
            }
            for (slot, &k) in traced.iter().enumerate() {
                full[k] = td[slot];
            }
            index[a * env_dim + e] = compose(&full, dims);
        }
    }

    let mut out = ComplexMatrix::zeros(out_dim);
    for a in 0..out_dim {
        for b in 0..out_dim {
            let mut acc = ZERO;
            for e in 0..env_dim {
                acc += m[(index[a * env_dim + e], index[b * env_dim + e])];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Relabels registers: the content of register `i` moves to register
/// `perm[i]`. Returns `P m P^dagger` for the induced permutation operator.
pub fn permute_systems(m: &ComplexMatrix, dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    check_dims(m, dims)?;
    let n = dims.len();
    if perm.len() != n || !is_permutation(perm) {
        return Err(Error::Structure(format!("{perm:?} is not a permutation of {n} registers")));
    }
    let mut new_dims = vec![0; n];
    for i in 0..n {
        new_dims[perm[i]] = dims[i];
    }
    let dim = m.dim();
    let mut old = vec![0usize; n];
    let mut new = vec![0usize; n];
    let map: Vec<usize> = (0..dim)
        .map(|x| {
            digits(x, dims, &mut old);
            for i in 0..n {
                new[perm[i]] = old[i];
            }
            compose(&new, &new_dims)
        })
        .collect();
    let mut out = ComplexMatrix::zeros(dim);
    for a in 0..dim {
        for b in 0..dim {
            out[(map[a], map[b])] = m[(a, b)];
        }
    }
    Ok(out)
}

pub(crate) fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::matrix::C64;

    fn rho_a() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => C64::new(0.6, 0.0),
            (1, 1) => C64::new(0.4, 0.0),
            (0, 1) => C64::new(0.1, 0.2),
            _ => C64::new(0.1, -0.2),
        })
    }

    fn sigma_b() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[0.2, 0.5, 0.3])
    }

    #[test]
    fn traces_out_product_factor() {
        let joint = rho_a().tensor(&sigma_b());
        let a = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        assert!(a.max_abs_diff(&rho_a()) < 1e-15);
        let b = partial_trace(&joint, &[2, 3], &[1]).unwrap();
        assert!(b.max_abs_diff(&sigma_b()) < 1e-15);
    }

    #[test]
    fn bell_state_half_is_maximally_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)];
        let red = partial_trace(&ComplexMatrix::projector(&bell), &[2, 2], &[1]).unwrap();
        assert!(red.max_abs_diff(&ComplexMatrix::diag_real(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let m = ComplexMatrix::identity(6);
        assert!(partial_trace(&m, &[2, 2], &[0]).is_err());
        assert!(partial_trace(&m, &[2, 3], &[2]).is_err());
        assert!(partial_trace(&m, &[2, 3], &[]).is_err());
    }

    #[test]
    fn swap_of_product() {
        let joint = rho_a().tensor(&sigma_b());
        let swapped = permute_systems(&joint, &[2, 3], &[1, 0]).unwrap();
        assert!(swapped.max_abs_diff(&sigma_b().tensor(&rho_a())) < 1e-15);
    }

    #[test]
    fn keeps_several_in_ascending_order() {
        let a = rho_a();
        let b = sigma_b();
        let c = ComplexMatrix::diag_real(&[0.9, 0.1]);
        let joint = a.tensor(&b).tensor(&c);
        let ac = partial_trace(&joint, &[2, 3, 2], &[2, 0]).unwrap();
        assert!(ac.max_abs_diff(&a.tensor(&c)) < 1e-15);
    }
}
