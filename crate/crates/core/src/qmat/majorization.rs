use crate::error::{Error, Result};

fn sorted_padded(v: &[f64], len: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out.resize(len, 0.0);
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// True iff `p` majorizes `q`: every prefix sum of `p` sorted descending
/// dominates the corresponding prefix sum of `q`, within `tol`.
///
/// The shorter vector is zero-padded. Both must be probability vectors.
pub fn majorizes_tol(p: &[f64], q: &[f64], tol: f64) -> Result<bool> {
    for &x in p.iter().chain(q) {
        if x < -tol || !x.is_finite() {
            return Err(Error::NegativeEntry(x));
        }
    }
    for (name, v) in [("p", p), ("q", q)] {
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::OutOfRange(format!("{name} sums to {s}, expected 1")));
        }
    }
    let len = p.len().max(q.len());
    let p = sorted_padded(p, len);
    let q = sorted_padded(q, len);
    let (mut sp, mut sq) = (0.0, 0.0);
    for k in 0..len {
        sp += p[k];
        sq += q[k];
        if sp < sq - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn majorizes(p: &[f64], q: &[f64]) -> Result<bool> {
    majorizes_tol(p, q, crate::DEFAULT_TOL)
}
