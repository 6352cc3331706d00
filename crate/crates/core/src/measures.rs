//! Coherence quantifiers: l1-norm, robustness, coherence fraction.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{cholesky, cholesky_inverse, eig_hermitian, solve_real, ComplexMatrix, DensityMatrix, C64};

/// Lattice seeds are enumerated exhaustively up to this many points.
const MAX_LATTICE_SEEDS: usize = 4096;
const TIE_TOL: f64 = 1e-12;
const ALIGN_TOL: f64 = 1e-10;

pub const DEFAULT_GRID: usize = 16;
pub const DEFAULT_REFINE_ITERS: usize = 200;

const ROBUSTNESS_NEWTON_BUDGET: usize = 10_000;
const ROBUSTNESS_GAP: f64 = 1e-11;

/// All three quantifiers for one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub l1: f64,
    pub robustness: f64,
    pub fraction: f64,
    pub fraction_phases: Vec<f64>,
    pub certified: bool,
}

/// `sum_{i != j} |rho_ij|`.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    rho.off_diagonal_l1()
}

/// Completely dephasing map: keeps the diagonal, drops everything else.
pub fn full_dephase(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::new(rho.diagonal_part()).expect("diagonal of a state is a state")
}

/// Result of the phase optimization behind the coherence fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionResult {
    pub value: f64,
    pub phases: Vec<f64>,
    /// Entries could be rotated to nonnegative reals and the closed form
    /// `(1 + C_l1) / d` was used.
    pub certified: bool,
}

/// `(1/d) v^dagger rho v` with `v_i = exp(i theta_i)`.
fn overlap(rho: &ComplexMatrix, theta: &[f64]) -> f64 {
    let d = rho.dim();
    let v: Vec<C64> = theta.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += v[i].conj() * rho[(i, j)] * v[j];
        }
    }
    acc.re / d as f64
}

fn normalize_phase(t: f64) -> f64 {
    let t = t.rem_euclid(TAU);
    if TAU - t < 1e-12 {
        0.0
    } else {
        t
    }
}

/// Exact coordinate maximization sweeps; coordinate 0 stays pinned at 0.
fn coordinate_ascent(rho: &ComplexMatrix, theta: &mut [f64], sweeps: usize) {
    let d = rho.dim();
    let mut v: Vec<C64> = theta.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    for _ in 0..sweeps {
        let mut moved = 0.0f64;
        for i in 1..d {
            let s: C64 = (0..d).filter(|&j| j != i).map(|j| rho[(i, j)] * v[j]).sum();
            if s.norm() <= 1e-300 {
                continue;
            }
            let new = s.arg();
            let delta = (new - theta[i]).rem_euclid(TAU);
            moved = moved.max(delta.min(TAU - delta));
            theta[i] = new;
            v[i] = C64::from_polar(1.0, new);
        }
        if moved < 1e-14 {
            break;
        }
    }
}

/// Newton steps on the reduced phase vector, accepted only if they do not
/// decrease the objective.
fn newton_polish(rho: &ComplexMatrix, theta: &mut [f64], steps: usize) {
    let d = rho.dim();
    if d < 2 {
        return;
    }
    let mut best = overlap(rho, theta);
    for _ in 0..steps {
        let v: Vec<C64> = theta.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        let w = |k: usize, j: usize| v[k].conj() * rho[(k, j)] * v[j];
        let m = d - 1;
        let mut grad = vec![0.0; m];
        let mut hess = vec![vec![0.0; m]; m];
        for k in 1..d {
            let row: C64 = (0..d).filter(|&j| j != k).map(|j| w(k, j)).sum();
            grad[k - 1] = 2.0 * row.im;
            hess[k - 1][k - 1] = -2.0 * row.re;
            for l in 1..d {
                if l != k {
                    hess[k - 1][l - 1] = 2.0 * w(k, l).re;
                }
            }
        }
        let gnorm = grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
        if gnorm < 1e-15 {
            break;
        }
        let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
        let Some(step) = solve_real(hess, neg) else {
            break;
        };
        let trial: Vec<f64> = std::iter::once(0.0)
            .chain(theta[1..].iter().zip(&step).map(|(t, s)| t + s))
            .collect();
        let value = overlap(rho, &trial);
        if value + 1e-16 < best {
            break;
        }
        best = value;
        theta.copy_from_slice(&trial);
    }
}

fn lattice_seeds(d: usize, grid: usize) -> Vec<Vec<f64>> {
    let free = d - 1;
    let full = (grid as f64).powi(free as i32);
    let mut seeds = Vec::new();
    if full <= MAX_LATTICE_SEEDS as f64 {
        let count = grid.pow(free as u32);
        for mut idx in 0..count {
            let mut seed = vec![0.0; d];
            for slot in seed.iter_mut().skip(1) {
                *slot = TAU * (idx % grid) as f64 / grid as f64;
                idx /= grid;
            }
            seeds.push(seed);
        }
    } else {
        // Kronecker sequence with irrational steps per coordinate
        let steps: Vec<f64> = (0..free).map(|k| ((k + 2) as f64).sqrt().fract()).collect();
        for s in 0..grid * grid {
            let mut seed = vec![0.0; d];
            for (slot, step) in seed.iter_mut().skip(1).zip(&steps) {
                *slot = TAU * ((s as f64) * step).fract();
            }
            seeds.push(seed);
        }
    }
    seeds
}

/// Whether `e^{-i theta_i} rho_ij e^{i theta_j}` is a nonnegative real for
/// every off-diagonal pair.
fn is_aligned(rho: &ComplexMatrix, theta: &[f64]) -> bool {
    let d = rho.dim();
    let scale = rho.max_abs().max(1e-300);
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let w = C64::from_polar(1.0, theta[j] - theta[i]) * rho[(i, j)];
            if w.im.abs() > ALIGN_TOL * scale || w.re < -ALIGN_TOL * scale {
                return false;
            }
        }
    }
    true
}

/// Coherence fraction: maximal overlap of `U rho U^dagger` with the maximally
/// coherent state over incoherent unitaries `U`.
///
/// Permutations leave the maximally coherent state invariant, so only the
/// diagonal phases are optimized. Seeds come from a `grid`-point lattice per
/// free phase plus the phase-aligned seed; each seed gets up to
/// `refine_iters` coordinate-ascent sweeps followed by a Newton polish.
pub fn coherence_fraction(rho: &DensityMatrix, grid: usize, refine_iters: usize) -> (f64, Vec<f64>) {
    let r = coherence_fraction_report(rho, grid, refine_iters);
    (r.value, r.phases)
}

pub fn coherence_fraction_report(rho: &DensityMatrix, grid: usize, refine_iters: usize) -> FractionResult {
    let m = rho.matrix();
    let d = m.dim();
    let bound = (1.0 + l1_coherence(rho)) / d as f64;
    if d == 1 {
        return FractionResult {
            value: 1.0,
            phases: vec![0.0],
            certified: true,
        };
    }
    let grid = grid.max(8);

    let mut seeds = vec![vec![0.0; d]];
    seeds.push((0..d).map(|j| if j == 0 { 0.0 } else { m[(j, 0)].arg() }).collect());
    seeds.extend(lattice_seeds(d, grid));

    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::with_capacity(seeds.len());
    for mut theta in seeds {
        coordinate_ascent(m, &mut theta, refine_iters.max(1));
        newton_polish(m, &mut theta, 20);
        let theta: Vec<f64> = theta.iter().map(|&t| normalize_phase(t)).collect();
        let value = overlap(m, &theta);
        candidates.push((value, theta));
        // the upper bound is attained: nothing can beat this seed
        if value >= bound - 1e-15 {
            break;
        }
    }

    let best = candidates.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    let (value, phases) = candidates
        .into_iter()
        .filter(|c| c.0 >= best - TIE_TOL)
        .min_by(|a, b| {
            a.1.iter()
                .zip(&b.1)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("at least one seed");

    if is_aligned(m, &phases) {
        FractionResult {
            value: bound,
            phases,
            certified: true,
        }
    } else {
        FractionResult {
            value: value.min(bound),
            phases,
            certified: false,
        }
    }
}

/// Robustness of coherence, `min { Tr(D) - 1 : D diagonal, D >= rho }`.
///
/// Solved with a log-det barrier on the diagonal of `D`; the returned value
/// is the trace of a strictly feasible point shifted down to the boundary,
/// so it is an upper bound within the duality gap.
pub fn robustness(rho: &DensityMatrix) -> Result<f64> {
    let m = rho.matrix();
    let d = m.dim();
    if rho.is_incoherent(1e-14) {
        return Ok(0.0);
    }

    let slack = |x: &[f64]| -> ComplexMatrix {
        ComplexMatrix::from_fn(d, |i, j| {
            if i == j {
                C64::new(x[i], 0.0) - m[(i, j)]
            } else {
                -m[(i, j)]
            }
        })
    };
    let barrier = |x: &[f64], t: f64| -> Option<f64> {
        let l = cholesky(&slack(x))?;
        let logdet: f64 = (0..d).map(|i| 2.0 * l[(i, i)].re.ln()).sum();
        Some(t * x.iter().sum::<f64>() - logdet)
    };

    let mut x = vec![2.0; d];
    let mut t = 1.0;
    let mut newton_steps = 0;
    loop {
        // centering
        for _ in 0..100 {
            let l = cholesky(&slack(&x)).expect("iterate stays strictly feasible");
            let inv = cholesky_inverse(&l);
            let grad: Vec<f64> = (0..d).map(|i| t - inv[(i, i)].re).collect();
            let hess: Vec<Vec<f64>> = (0..d)
                .map(|i| (0..d).map(|j| inv[(i, j)].norm_sqr()).collect())
                .collect();
            let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
            newton_steps += 1;
            let Some(step) = solve_real(hess, neg) else {
                break;
            };
            let decrement: f64 = -grad.iter().zip(&step).map(|(g, s)| g * s).sum::<f64>();
            if decrement < 1e-14 {
                break;
            }
            let f0 = barrier(&x, t).expect("feasible");
            let slope = -decrement;
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha > 1e-12 {
                let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
                if let Some(f) = barrier(&trial, t) {
                    if f <= f0 + 0.25 * alpha * slope {
                        x = trial;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted || newton_steps >= ROBUSTNESS_NEWTON_BUDGET {
                break;
            }
        }
        if d as f64 / t <= ROBUSTNESS_GAP {
            break;
        }
        if newton_steps >= ROBUSTNESS_NEWTON_BUDGET {
            let best = polished_value(&slack(&x), &x);
            return Err(Error::NotConverged {
                what: "robustness barrier method",
                iterations: newton_steps,
                best,
            });
        }
        t *= 8.0;
    }
    Ok(polished_value(&slack(&x), &x))
}

/// Shift `x` down uniformly until `diag(x) - rho` touches singularity.
fn polished_value(slack: &ComplexMatrix, x: &[f64]) -> f64 {
    let shift = eig_hermitian(slack).map(|s| s.min().max(0.0)).unwrap_or(0.0);
    let trace: f64 = x.iter().map(|v| v - shift).sum();
    (trace - 1.0).max(0.0)
}

/// Maximal phase-discrimination advantage, `1 + C_R(rho)`.
pub fn advantage_ratio(rho: &DensityMatrix) -> Result<f64> {
    Ok(1.0 + robustness(rho)?)
}

pub fn measure_report(rho: &DensityMatrix) -> Result<MeasureReport> {
    let frac = coherence_fraction_report(rho, DEFAULT_GRID, DEFAULT_REFINE_ITERS);
    Ok(MeasureReport {
        l1: l1_coherence(rho),
        robustness: robustness(rho)?,
        fraction: frac.value,
        fraction_phases: frac.phases,
        certified: frac.certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus() -> DensityMatrix {
        DensityMatrix::maximally_coherent(2)
    }

    fn cf(rho: &DensityMatrix) -> f64 {
        coherence_fraction(rho, DEFAULT_GRID, DEFAULT_REFINE_ITERS).0
    }

    fn dephased_psi(p: f64) -> DensityMatrix {
        let mut m = ComplexMatrix::diag_real(&[0.5, 0.5, 0.0]);
        m[(0, 1)] = C64::new((1.0 - p) / 2.0, 0.0);
        m[(1, 0)] = C64::new((1.0 - p) / 2.0, 0.0);
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_coherence(&DensityMatrix::incoherent(&[0.3, 0.7]).unwrap()), 0.0);
        assert!((l1_coherence(&plus()) - 1.0).abs() < 1e-15);
        assert!((l1_coherence(&DensityMatrix::maximally_coherent(3)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn dephase_examples() {
        let out = full_dephase(&plus());
        assert!(out.max_abs_diff(&ComplexMatrix::diag_real(&[0.5, 0.5])) < 1e-15);
        let diag = DensityMatrix::incoherent(&[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(full_dephase(&diag), diag);
    }

    #[test]
    fn fraction_examples() {
        for d in 2..=5 {
            assert!((cf(&DensityMatrix::maximally_coherent(d)) - 1.0).abs() < 1e-12);
        }
        let inc = DensityMatrix::incoherent(&[0.2, 0.3, 0.5]).unwrap();
        assert!((cf(&inc) - 1.0 / 3.0).abs() < 1e-15);
        assert!((cf(&dephased_psi(0.4)) - 1.6 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fraction_certified_for_nonnegative_entries() {
        let r = coherence_fraction_report(&dephased_psi(0.4), 8, 50);
        assert!(r.certified);
        assert!(r.phases.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn fraction_reabsorbs_phases() {
        let mut m = ComplexMatrix::diag_real(&[0.4, 0.35, 0.25]);
        let off = [(0, 1, C64::new(0.1, 0.05)), (0, 2, C64::new(-0.05, 0.08)), (1, 2, C64::new(0.02, -0.09))];
        for (i, j, z) in off {
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
        let rho = DensityMatrix::new(m.clone()).unwrap();
        let u = ComplexMatrix::diag(&[C64::from_polar(1.0, 0.3), C64::from_polar(1.0, 2.1), C64::from_polar(1.0, -1.2)]);
        let rotated = DensityMatrix::new(u.conjugate(&m)).unwrap();
        assert!((cf(&rho) - cf(&rotated)).abs() < 1e-10);
        assert!(cf(&rho) <= (1.0 + l1_coherence(&rho)) / 3.0 + 1e-12);
    }

    #[test]
    fn robustness_examples() {
        assert_eq!(robustness(&DensityMatrix::incoherent(&[0.3, 0.7]).unwrap()).unwrap(), 0.0);
        assert!((robustness(&plus()).unwrap() - 1.0).abs() < 1e-8);
        let mut m = ComplexMatrix::diag_real(&[0.5, 0.5]);
        m[(0, 1)] = C64::new(0.3, 0.0);
        m[(1, 0)] = C64::new(0.3, 0.0);
        assert!((robustness(&DensityMatrix::new(m).unwrap()).unwrap() - 0.6).abs() < 1e-8);
    }

    #[test]
    fn robustness_brute_force_qubit() {
        // minimize x0 + x1 with (x0 - a)(x1 - b) >= |c|^2 by scanning x0
        let (a, b, c) = (0.7, 0.3, C64::new(0.2, -0.25));
        let mut m = ComplexMatrix::diag_real(&[a, b]);
        m[(0, 1)] = c;
        m[(1, 0)] = c.conj();
        let rho = DensityMatrix::new(m).unwrap();
        let mut best = f64::INFINITY;
        for k in 1..200_000 {
            let x0 = a + k as f64 * 1e-5;
            let x1 = b + c.norm_sqr() / (x0 - a);
            best = best.min(x0 + x1 - 1.0);
        }
        assert!((robustness(&rho).unwrap() - best).abs() < 1e-6);
    }

    #[test]
    fn advantage_examples() {
        assert_eq!(advantage_ratio(&DensityMatrix::incoherent(&[0.5, 0.5]).unwrap()).unwrap(), 1.0);
        assert!((advantage_ratio(&plus()).unwrap() - 2.0).abs() < 1e-8);
        assert!((advantage_ratio(&DensityMatrix::maximally_coherent(3)).unwrap() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn report_serializes_with_expected_keys() {
        let r = measure_report(&plus()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["l1", "robustness", "fraction", "fraction_phases", "certified"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
