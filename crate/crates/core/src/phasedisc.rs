//! Phase-discrimination games: diagonal phase encodings, minimum-error
//! discrimination and advantage ratios over the incoherent baseline.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{eig_hermitian, pinv_sqrt, positive_projector, trace_norm, ComplexMatrix, DensityMatrix, C64};
use crate::DEFAULT_TOL;

const PINV_CUTOFF: f64 = 1e-12;
const DAMPING: f64 = 0.5;
const MAX_ITERATIONS: usize = 5000;
const GAP_TARGET: f64 = 1e-9;
/// Largest certified gap still reported as converged when the budget runs out.
const ACCEPT_GAP: f64 = 1e-6;

/// Hypotheses `(p_k, phi_k)` over a `dim`-level system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseGame {
    hypotheses: Vec<(f64, f64)>,
    dim: usize,
}

impl PhaseGame {
    /// Phases are reduced into `[0, 2 pi)`.
    pub fn new(hypotheses: Vec<(f64, f64)>, dim: usize) -> Result<Self> {
        if hypotheses.is_empty() || dim == 0 {
            return Err(Error::Structure("a game needs a hypothesis and a positive dimension".into()));
        }
        let total: f64 = hypotheses.iter().map(|h| h.0).sum();
        if hypotheses.iter().any(|h| !(h.0 > 0.0) || !h.1.is_finite()) {
            return Err(Error::OutOfRange("priors must be positive and phases finite".into()));
        }
        if (total - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::OutOfRange(format!("priors sum to {total}")));
        }
        let hypotheses = hypotheses
            .into_iter()
            .map(|(p, phi)| (p, phi.rem_euclid(TAU)))
            .collect();
        Ok(Self { hypotheses, dim })
    }

    pub fn uniform(phases: &[f64], dim: usize) -> Result<Self> {
        let p = 1.0 / phases.len() as f64;
        Self::new(phases.iter().map(|&phi| (p, phi)).collect(), dim)
    }

    /// `m` equally spaced phases `k * spacing`, uniform priors.
    pub fn arithmetic(m: usize, spacing: f64, dim: usize) -> Result<Self> {
        let phases: Vec<f64> = (0..m).map(|k| k as f64 * spacing).collect();
        Self::uniform(&phases, dim)
    }

    pub fn hypotheses(&self) -> &[(f64, f64)] {
        &self.hypotheses
    }

    pub fn priors(&self) -> Vec<f64> {
        self.hypotheses.iter().map(|h| h.0).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.hypotheses.iter().map(|h| h.1).collect()
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Weighted encoded states `p_k U_k rho U_k^dagger`.
    fn weighted_states(&self, rho: &DensityMatrix) -> Result<Vec<ComplexMatrix>> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "game on dimension {} played with a {}-dimensional state",
                self.dim,
                rho.dim()
            )));
        }
        Ok(self
            .hypotheses
            .iter()
            .map(|&(p, phi)| encode_matrix(rho, phi).scale_real(p))
            .collect())
    }
}

/// Measurement with validated positivity and completeness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::Structure("empty POVM".into()));
        };
        let d = first.dim();
        let mut sum = ComplexMatrix::zeros(d);
        for e in &elements {
            if e.dim() != d {
                return Err(Error::DimensionMismatch("POVM elements of different sizes".into()));
            }
            let deviation = e.hermiticity_error();
            if deviation > DEFAULT_TOL {
                return Err(Error::NotHermitian { deviation });
            }
            let min = eig_hermitian(e)?.min();
            if min < -DEFAULT_TOL {
                return Err(Error::NotPositive { min_eigenvalue: min });
            }
            sum += e;
        }
        let deviation = (&sum - &ComplexMatrix::identity(d)).frobenius_norm();
        if deviation > DEFAULT_TOL {
            return Err(Error::Incomplete { deviation });
        }
        Ok(Self { elements })
    }

    pub fn trivial(dim: usize) -> Self {
        Self {
            elements: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

fn encode_matrix(rho: &ComplexMatrix, phi: f64) -> ComplexMatrix {
    let d = rho.dim();
    let phase: Vec<C64> = (0..d).map(|j| C64::from_polar(1.0, j as f64 * phi)).collect();
    ComplexMatrix::from_fn(d, |i, j| phase[i] * rho[(i, j)] * phase[j].conj())
}

/// `U_phi rho U_phi^dagger` with `U_phi = diag(e^{i j phi})`.
pub fn encode(rho: &DensityMatrix, phi: f64) -> DensityMatrix {
    DensityMatrix::with_tol(encode_matrix(rho, phi), rho.tol()).expect("unitary conjugation of a state")
}

fn real_trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// `sum_k p_k Tr[U_k rho U_k^dagger M_k]`.
pub fn success_probability(game: &PhaseGame, rho: &DensityMatrix, povm: &Povm) -> Result<f64> {
    if povm.len() != game.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} POVM elements for {} hypotheses",
            povm.len(),
            game.len()
        )));
    }
    let states = game.weighted_states(rho)?;
    Ok(states
        .iter()
        .zip(povm.elements())
        .map(|(s, m)| real_trace_product(s, m))
        .sum())
}

/// Output of the iterative minimum-error solver.
#[derive(Debug, Clone)]
pub struct IterativeSolution {
    pub value: f64,
    pub upper_bound: f64,
    pub povm: Povm,
    pub iterations: usize,
    pub converged: bool,
}

/// Dual-feasible bound `Tr(L) + d * max_k lambda_max(p_k rho_k - L)` with
/// `L` the Hermitian part of `sum_k p_k rho_k M_k`.
fn dual_bound(states: &[ComplexMatrix], elements: &[ComplexMatrix]) -> Result<(f64, f64)> {
    let d = states[0].dim();
    let mut l = ComplexMatrix::zeros(d);
    for (s, m) in states.iter().zip(elements) {
        l += &s.matmul(m);
    }
    let l = l.hermitian_part();
    let value = l.trace().re;
    let mut shift = f64::NEG_INFINITY;
    for s in states {
        shift = shift.max(eig_hermitian(&(s - &l))?.max());
    }
    Ok((value, value + d as f64 * shift))
}

/// Fixed-point minimum-error iteration
/// `M_k <- G^{-1/2} R_k M_k R_k G^{-1/2}`, `R_k = p_k rho_k`, `G = sum_j R_j M_j R_j`,
/// damped and renormalized to completeness, stopped on the duality gap.
pub fn optimal_success_iterative(game: &PhaseGame, rho: &DensityMatrix) -> Result<IterativeSolution> {
    let states = game.weighted_states(rho)?;
    let d = game.dim();
    let m = game.len();
    let mut elements: Vec<ComplexMatrix> = game
        .priors()
        .iter()
        .map(|&p| ComplexMatrix::identity(d).scale_real(p))
        .collect();

    let mut iterations = 0;
    let (mut value, mut bound) = dual_bound(&states, &elements)?;
    while bound - value >= GAP_TARGET && iterations < MAX_ITERATIONS {
        let sandwiched: Vec<ComplexMatrix> = states
            .iter()
            .zip(&elements)
            .map(|(r, mk)| r.matmul(mk).matmul(r))
            .collect();
        let mut g = ComplexMatrix::zeros(d);
        for s in &sandwiched {
            g += s;
        }
        let g_inv = pinv_sqrt(&g.hermitian_part(), PINV_CUTOFF)?;
        for (mk, s) in elements.iter_mut().zip(&sandwiched) {
            let update = g_inv.matmul(s).matmul(&g_inv);
            *mk = (&mk.scale_real(1.0 - DAMPING) + &update.scale_real(DAMPING)).hermitian_part();
        }
        let mut total = ComplexMatrix::zeros(d);
        for mk in &elements {
            total += mk;
        }
        let t_inv = pinv_sqrt(&total.hermitian_part(), PINV_CUTOFF)?;
        for mk in elements.iter_mut() {
            *mk = t_inv.matmul(mk).matmul(&t_inv).hermitian_part();
        }
        iterations += 1;
        (value, bound) = dual_bound(&states, &elements)?;
    }
    debug_assert_eq!(elements.len(), m);
    let povm = Povm::new(elements)?;
    Ok(IterativeSolution {
        value,
        upper_bound: bound,
        povm,
        iterations,
        converged: bound - value <= ACCEPT_GAP,
    })
}

/// Two-hypothesis optimum `(1 + ||p_0 rho_0 - p_1 rho_1||_1) / 2` and its projective POVM.
pub fn helstrom(game: &PhaseGame, rho: &DensityMatrix) -> Result<(f64, Povm)> {
    if game.len() != 2 {
        return Err(Error::Structure(format!("Helstrom needs two hypotheses, got {}", game.len())));
    }
    let states = game.weighted_states(rho)?;
    let diff = &states[0] - &states[1];
    let value = 0.5 * (1.0 + trace_norm(&diff));
    let p = positive_projector(&diff)?;
    let q = &ComplexMatrix::identity(game.dim()) - &p;
    Ok((value, Povm::new(vec![p, q])?))
}

/// Optimal success probability: Helstrom for two hypotheses, the iterative
/// solver otherwise.
pub fn optimal_success(game: &PhaseGame, rho: &DensityMatrix) -> Result<(f64, Povm)> {
    match game.len() {
        1 => {
            game.weighted_states(rho)?;
            Ok((1.0, Povm::trivial(game.dim())))
        }
        2 => helstrom(game, rho),
        _ => {
            let sol = optimal_success_iterative(game, rho)?;
            if !sol.converged {
                return Err(Error::NotConverged {
                    what: "minimum-error discrimination",
                    iterations: sol.iterations,
                    best: sol.value,
                });
            }
            Ok((sol.value, sol.povm))
        }
    }
}

/// `max_k p_k`: always guess the likeliest phase.
pub fn incoherent_baseline(game: &PhaseGame) -> f64 {
    game.hypotheses.iter().map(|h| h.0).fold(0.0, f64::max)
}

/// `P_succ(rho) / P_succ(incoherent)`.
pub fn empirical_advantage(game: &PhaseGame, rho: &DensityMatrix) -> Result<f64> {
    Ok(optimal_success(game, rho)?.0 / incoherent_baseline(game))
}

/// Uniform-prior family of arithmetic-phase games.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameFamily {
    pub m_values: Vec<usize>,
    /// Spacings `j * 2 pi / (m * grid)` for `j = 1..=grid`.
    pub grid: usize,
    pub refine_iters: usize,
}

impl Default for GameFamily {
    fn default() -> Self {
        Self {
            m_values: (2..=6).collect(),
            grid: 12,
            refine_iters: 30,
        }
    }
}

/// Best game found for one hypothesis count.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub m: usize,
    pub spacing: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub best_ratio: f64,
    /// `1 + C_R`, the supremum over all games.
    pub bound: f64,
}

/// Maximizes the advantage over the family: a spacing grid per `m`, then
/// golden-section refinement around the best grid cell.
pub fn sweep_games(rho: &DensityMatrix, family: &GameFamily) -> Result<SweepResult> {
    let d = rho.dim();
    let ratio_at = |m: usize, spacing: f64| -> Result<f64> {
        empirical_advantage(&PhaseGame::arithmetic(m, spacing, d)?, rho)
    };
    let points = family
        .m_values
        .par_iter()
        .map(|&m| -> Result<SweepPoint> {
            let cell = TAU / (m * family.grid) as f64;
            let mut best = (cell, f64::NEG_INFINITY);
            for j in 1..=family.grid {
                let s = j as f64 * cell;
                let r = ratio_at(m, s)?;
                if r > best.1 {
                    best = (s, r);
                }
            }
            let (mut lo, mut hi) = ((best.0 - cell).max(1e-6), best.0 + cell);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..family.refine_iters {
                let a = hi - g * (hi - lo);
                let b = lo + g * (hi - lo);
                if ratio_at(m, a)? >= ratio_at(m, b)? {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            let mid = 0.5 * (lo + hi);
            let r = ratio_at(m, mid)?;
            if r > best.1 {
                best = (mid, r);
            }
            Ok(SweepPoint {
                m,
                spacing: best.0,
                ratio: best.1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best_ratio = points.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(SweepResult {
        points,
        best_ratio,
        bound: crate::measures::advantage_ratio(rho)?,
    })
}
