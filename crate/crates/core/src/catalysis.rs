//! Correlated catalysis on classical-quantum block states and the qutrit
//! phase-damping example.
//!
//! A [`CQBlockState`] stores `sum_k w_k X_k (x) |k><k|_R` as its list of
//! conditional blocks. System and catalyst registers are the qudit factors of
//! each block; register 0 is the system `s`, the remaining ones belong to the
//! catalyst together with the flag `R`.

use serde::Serialize;

use crate::channels::{dephasing_channel, KrausChannel};
use crate::error::{Error, Result};
use crate::measures::coherence_fraction_report;
use crate::qmat::{
    majorizes, partial_trace, permute_systems, trace_norm, ComplexMatrix, DensityMatrix, C64,
};

/// One conditional block `w_k X_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub weight: f64,
    pub state: DensityMatrix,
    pub sys_dims: Vec<usize>,
}

/// Block-diagonal state over a flag register `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct CQBlockState {
    blocks: Vec<Block>,
}

impl CQBlockState {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Structure("a CQ state needs at least one block".into()));
        }
        let total: f64 = blocks.iter().map(|b| b.weight).sum();
        if (total - 1.0).abs() > crate::DEFAULT_TOL || blocks.iter().any(|b| b.weight < 0.0) {
            return Err(Error::OutOfRange(format!("block weights sum to {total}")));
        }
        for b in &blocks {
            let d: usize = b.sys_dims.iter().product();
            if d != b.state.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "block dims {:?} do not match a {}-dimensional state",
                    b.sys_dims,
                    b.state.dim()
                )));
            }
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn flag_dim(&self) -> usize {
        self.blocks.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.weight).collect()
    }

    fn map_blocks(&self, f: impl Fn(&Block) -> Result<Block>) -> Result<Self> {
        Ok(Self {
            blocks: self.blocks.iter().map(f).collect::<Result<_>>()?,
        })
    }

    /// Drops register 0 (the system) from every block.
    pub fn trace_system(&self) -> Result<Self> {
        self.map_blocks(|b| {
            let n = b.sys_dims.len();
            let (state, sys_dims) = if n == 1 {
                (DensityMatrix::new(ComplexMatrix::identity(1))?, vec![1])
            } else {
                let keep: Vec<usize> = (1..n).collect();
                let m = partial_trace(b.state.matrix(), &b.sys_dims, &keep)?;
                (DensityMatrix::new(m)?, b.sys_dims[1..].to_vec())
            };
            Ok(Block {
                weight: b.weight,
                state,
                sys_dims,
            })
        })
    }

    /// Reduced state of register 0 with catalyst and flag traced out.
    pub fn system_marginal(&self) -> Result<DensityMatrix> {
        let mut acc: Option<ComplexMatrix> = None;
        for b in &self.blocks {
            let part = partial_trace(b.state.matrix(), &b.sys_dims, &[0])?.scale_real(b.weight);
            acc = Some(match acc {
                None => part,
                Some(a) if a.dim() == part.dim() => &a + &part,
                Some(_) => {
                    return Err(Error::DimensionMismatch("blocks disagree on the system dimension".into()))
                }
            });
        }
        DensityMatrix::new(acc.expect("at least one block"))
    }

    /// Full matrix `sum_k w_k X_k (x) |k><k|` (flag register last).
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let d = self.blocks[0].state.dim();
        if self.blocks.iter().any(|b| b.state.dim() != d) {
            return Err(Error::DimensionMismatch("blocks of different dimension".into()));
        }
        let r = self.flag_dim();
        let mut out = ComplexMatrix::zeros(d * r);
        for (k, b) in self.blocks.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    out[(i * r + k, j * r + k)] = b.state[(i, j)] * b.weight;
                }
            }
        }
        Ok(out)
    }
}

/// Trace distance of two CQ states sharing the flag basis.
pub fn cq_trace_distance(a: &CQBlockState, b: &CQBlockState) -> Result<f64> {
    if a.flag_dim() != b.flag_dim() {
        return Err(Error::DimensionMismatch("flag registers differ".into()));
    }
    let mut acc = 0.0;
    for (x, y) in a.blocks.iter().zip(&b.blocks) {
        if x.state.dim() != y.state.dim() {
            return Err(Error::DimensionMismatch("blocks of different dimension".into()));
        }
        acc += trace_norm(&(&x.state.scale_real(x.weight) - &y.state.scale_real(y.weight)));
    }
    Ok(0.5 * acc)
}

/// Single-party dimension of an `n`-partite state on equal subsystems.
fn party_dim(total: usize, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::OutOfRange("number of parties must be positive".into()));
    }
    let guess = (total as f64).powf(1.0 / n as f64).round() as usize;
    for d in guess.saturating_sub(1).max(1)..=guess + 1 {
        if d.checked_pow(n as u32) == Some(total) {
            return Ok(d);
        }
    }
    Err(Error::DimensionMismatch(format!(
        "dimension {total} is not an {n}-th power"
    )))
}

/// `Gamma_i`: the reduced state on the last `i` of `n` parties; `Gamma_0` is the scalar 1.
pub fn marginal_gamma(gamma: &DensityMatrix, n: usize, i: usize) -> Result<DensityMatrix> {
    let d = party_dim(gamma.dim(), n)?;
    if i > n {
        return Err(Error::OutOfRange(format!("marginal size {i} exceeds {n} parties")));
    }
    if i == 0 {
        return DensityMatrix::new(ComplexMatrix::identity(1));
    }
    if i == n {
        return Ok(gamma.clone());
    }
    let keep: Vec<usize> = (n - i..n).collect();
    DensityMatrix::new(partial_trace(gamma.matrix(), &vec![d; n], &keep)?)
}

fn check_gamma(rho: &DensityMatrix, gamma: &DensityMatrix, n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("catalysis needs n >= 2 copies, got {n}")));
    }
    let d = rho.dim();
    if d.checked_pow(n as u32) != Some(gamma.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "target on dimension {} does not match {n} copies of a {d}-level system",
            gamma.dim()
        )));
    }
    Ok(d)
}

/// `tau_c = (1/n) sum_k rho^(k-1) (x) Gamma_{n-k} (x) |k><k|`.
pub fn build_catalyst(rho: &DensityMatrix, gamma: &DensityMatrix, n: usize) -> Result<CQBlockState> {
    let d = check_gamma(rho, gamma, n)?;
    let blocks = (1..=n)
        .map(|k| {
            let state = rho.tensor_power(k - 1).tensor(&marginal_gamma(gamma, n, n - k)?);
            Ok(Block {
                weight: 1.0 / n as f64,
                state,
                sys_dims: vec![d; n - 1],
            })
        })
        .collect::<Result<_>>()?;
    CQBlockState::new(blocks)
}

/// `rho (x) tau_c`: the catalyst with a fresh system prepended to every block.
pub fn attach_system(rho: &DensityMatrix, catalyst: &CQBlockState) -> Result<CQBlockState> {
    let d = rho.dim();
    catalyst.map_blocks(|b| {
        let mut sys_dims = vec![d];
        sys_dims.extend(&b.sys_dims);
        Ok(Block {
            weight: b.weight,
            state: rho.tensor(&b.state),
            sys_dims,
        })
    })
}

/// Step 1: measure the flag and apply the transformation on outcome `n`,
/// which replaces the last block `rho^(x)n` by `Gamma`.
pub fn step1_measure_apply(input: &CQBlockState, gamma: &DensityMatrix) -> Result<CQBlockState> {
    let n = input.flag_dim();
    let last = &input.blocks[n - 1];
    if last.state.dim() != gamma.dim() || last.sys_dims.len() != n {
        return Err(Error::Structure(format!(
            "block {n} is not an {n}-register state matching the target"
        )));
    }
    let mut out = input.clone();
    out.blocks[n - 1].state = gamma.clone();
    Ok(out)
}

/// Step 2: the flag shift `|k> -> |k+1>`, `|n> -> |1>`.
pub fn step2_cycle_flag(input: &CQBlockState) -> CQBlockState {
    let mut blocks = input.blocks.clone();
    blocks.rotate_right(1);
    CQBlockState { blocks }
}

/// Step 3: conditioned on flag `k`, shift system registers `s_i -> s_{i+1}`
/// for `i < k` and `s_k -> s_1`.
///
/// Block `k` holds `rho^(k-1) (x) Gamma_{n-k+1}` after step 2, so the shift
/// brings the first party of `Gamma_{n-k+1}` to the system register and
/// leaves `rho^(k-1) (x) Gamma_{n-k}` on the catalyst.
pub fn step3_cycle_systems(input: &CQBlockState) -> Result<CQBlockState> {
    let mut blocks = Vec::with_capacity(input.flag_dim());
    for (idx, b) in input.blocks.iter().enumerate() {
        let k = idx + 1;
        let n = b.sys_dims.len();
        if b.sys_dims.iter().any(|&x| x != b.sys_dims[0]) {
            return Err(Error::DimensionMismatch(format!(
                "registers {:?} are not of equal dimension",
                b.sys_dims
            )));
        }
        if k > n {
            return Err(Error::Structure(format!("block {k} has only {n} registers")));
        }
        let perm: Vec<usize> = (0..n)
            .map(|i| if i + 1 < k { i + 1 } else if i + 1 == k { 0 } else { i })
            .collect();
        let m = permute_systems(b.state.matrix(), &b.sys_dims, &perm)?;
        blocks.push(Block {
            weight: b.weight,
            state: DensityMatrix::with_tol(m, b.state.tol())?,
            sys_dims: b.sys_dims.clone(),
        });
    }
    Ok(CQBlockState { blocks })
}

/// `rho' = (1/n) sum_i Tr_{/i} Gamma`.
pub fn processed_state(gamma: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    let d = party_dim(gamma.dim(), n)?;
    let dims = vec![d; n];
    let mut acc = ComplexMatrix::zeros(d);
    for i in 0..n {
        acc += &partial_trace(gamma.matrix(), &dims, &[i])?;
    }
    DensityMatrix::new(acc.scale_real(1.0 / n as f64))
}

/// Every intermediate state of the protocol.
#[derive(Debug, Clone)]
pub struct ProtocolTrace {
    pub n: usize,
    pub catalyst: CQBlockState,
    pub input: CQBlockState,
    pub after_step1: CQBlockState,
    pub after_step2: CQBlockState,
    pub after_step3: CQBlockState,
    pub processed: DensityMatrix,
    pub catalyst_restored_error: f64,
}

/// Runs Steps 1-3 on `rho (x) tau_c` with the transformation output `gamma`.
pub fn run_protocol(rho: &DensityMatrix, gamma: &DensityMatrix, n: usize) -> Result<ProtocolTrace> {
    let catalyst = build_catalyst(rho, gamma, n)?;
    let input = attach_system(rho, &catalyst)?;
    let after_step1 = step1_measure_apply(&input, gamma)?;
    let after_step2 = step2_cycle_flag(&after_step1);
    let after_step3 = step3_cycle_systems(&after_step2)?;
    let processed = after_step3.system_marginal()?;
    let catalyst_restored_error = cq_trace_distance(&after_step3.trace_system()?, &catalyst)?;
    Ok(ProtocolTrace {
        n,
        catalyst,
        input,
        after_step1,
        after_step2,
        after_step3,
        processed,
        catalyst_restored_error,
    })
}

/// `|psi> = (|0> + |1>)/sqrt2` on a qutrit.
pub fn psi_state() -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::pure(&[C64::new(h, 0.0), C64::new(h, 0.0), C64::new(0.0, 0.0)])
        .expect("normalized")
}

fn check_z(z: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::OutOfRange(format!("z = {z} outside [0, 1]")));
    }
    Ok(())
}

/// Amplitudes of `|phi(z)> = sqrt(z/3)(|00> + |01> + |02>) + sqrt(1-z)|12>`.
pub fn phi_amplitudes(z: f64) -> Result<Vec<C64>> {
    check_z(z)?;
    let a = (z / 3.0).sqrt();
    let mut v = vec![C64::new(0.0, 0.0); 9];
    v[0] = C64::new(a, 0.0);
    v[1] = C64::new(a, 0.0);
    v[2] = C64::new(a, 0.0);
    v[5] = C64::new((1.0 - z).sqrt(), 0.0);
    Ok(v)
}

pub fn phi_state(z: f64) -> Result<DensityMatrix> {
    DensityMatrix::new(ComplexMatrix::projector(&phi_amplitudes(z)?))
}

/// `zeta = Tr_{A1} |phi><phi|`.
pub fn zeta(z: f64) -> Result<DensityMatrix> {
    DensityMatrix::new(partial_trace(phi_state(z)?.matrix(), &[3, 3], &[1])?)
}

/// `zeta' = Tr_{A2} |phi><phi|`.
pub fn zeta_prime(z: f64) -> Result<DensityMatrix> {
    DensityMatrix::new(partial_trace(phi_state(z)?.matrix(), &[3, 3], &[0])?)
}

/// The closed-form processed qutrit `rho'(z)`.
pub fn closed_form_rho_prime(z: f64) -> Result<DensityMatrix> {
    check_z(z)?;
    let d0 = 2.0 * z / 3.0;
    let d1 = (3.0 - 2.0 * z) / 6.0;
    let c01 = z / 6.0 + (z * (1.0 - z)).sqrt() / (2.0 * 3f64.sqrt());
    let c = z / 6.0;
    DensityMatrix::new(ComplexMatrix::from_real_rows(&[
        vec![d0, c01, c],
        vec![c01, d1, c],
        vec![c, c, d1],
    ])?)
}

/// Coherence vectors (squared amplitudes) of `|psi>^(x)2` and `|phi(z)>`.
pub fn gate_vectors(z: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let psi = [0.5, 0.5, 0.0];
    let source: Vec<f64> = psi.iter().flat_map(|a| psi.iter().map(move |b| a * b)).collect();
    let target = phi_amplitudes(z)?.iter().map(|a| a.norm_sqr()).collect();
    Ok((source, target))
}

/// Lower end of the admissible `z` range for the worked example.
pub const Z_MIN: f64 = 0.75;

/// Outcome of the qutrit example.
#[derive(Debug, Clone)]
pub struct QutritExample {
    pub z: f64,
    pub p: f64,
    pub trace: ProtocolTrace,
    pub cf_direct: f64,
    pub cf_processed: f64,
}

/// Analytic coherence fraction of `Lambda_deph(psi)`.
pub fn cf_direct_formula(p: f64) -> f64 {
    (2.0 - p) / 3.0
}

/// Analytic coherence fraction of `Lambda_deph(rho'(z))`.
pub fn cf_processed_formula(z: f64, p: f64) -> f64 {
    1.0 / 3.0 + (1.0 - p) * z / 3.0 + (1.0 - p) * (z * (1.0 - z)).sqrt() / (3.0 * 3f64.sqrt())
}

/// The complete qutrit example at `n = 2`.
///
/// Refuses `z < 3/4` and any `z` for which `|psi>^(x)2 -> |phi(z)>` fails the
/// majorization test.
pub fn run_qutrit_example(z: f64, p: f64) -> Result<QutritExample> {
    check_z(z)?;
    let channel = dephasing_channel(p)?;
    if z < Z_MIN {
        return Err(Error::GateRefused(format!("z = {z} is below {Z_MIN}")));
    }
    let (source, target) = gate_vectors(z)?;
    if !majorizes(&target, &source)? {
        return Err(Error::GateRefused(format!(
            "|phi({z})> does not majorize |psi>^2; the transformation is not incoherent"
        )));
    }
    let psi = psi_state();
    let trace = run_protocol(&psi, &phi_state(z)?, 2)?;
    let cf = |ch: &KrausChannel, rho: &DensityMatrix| -> Result<f64> {
        Ok(coherence_fraction_report(&ch.apply(rho)?, crate::measures::DEFAULT_GRID, crate::measures::DEFAULT_REFINE_ITERS).value)
    };
    let cf_direct = cf(&channel, &psi)?;
    let cf_processed = cf(&channel, &trace.processed)?;
    Ok(QutritExample {
        z,
        p,
        trace,
        cf_direct,
        cf_processed,
    })
}

/// Serializable summary of a protocol run.
#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub n: usize,
    pub weights: Vec<f64>,
    pub catalyst: Vec<ComplexMatrix>,
    pub after_step1: Vec<ComplexMatrix>,
    pub after_step2: Vec<ComplexMatrix>,
    pub after_step3: Vec<ComplexMatrix>,
    pub processed: ComplexMatrix,
    pub catalyst_restored_error: f64,
}

impl From<&ProtocolTrace> for TraceSummary {
    fn from(t: &ProtocolTrace) -> Self {
        let mats = |s: &CQBlockState| s.blocks().iter().map(|b| b.state.matrix().clone()).collect();
        Self {
            n: t.n,
            weights: t.catalyst.weights(),
            catalyst: mats(&t.catalyst),
            after_step1: mats(&t.after_step1),
            after_step2: mats(&t.after_step2),
            after_step3: mats(&t.after_step3),
            processed: t.processed.matrix().clone(),
            catalyst_restored_error: t.catalyst_restored_error,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma() -> DensityMatrix {
        DensityMatrix::new(
            ComplexMatrix::from_real_rows(&[vec![0.6, 0.2], vec![0.2, 0.4]]).unwrap(),
        )
        .unwrap()
    }

    fn tau() -> DensityMatrix {
        DensityMatrix::incoherent(&[0.9, 0.1]).unwrap()
    }

    #[test]
    fn marginals_of_products() {
        let s = sigma();
        let g = s.tensor_power(3);
        for i in 0..=3 {
            let m = marginal_gamma(&g, 3, i).unwrap();
            assert!(m.max_abs_diff(&s.tensor_power(i)) < 1e-14);
        }
        assert!(marginal_gamma(&g, 3, 4).is_err());
        assert!(marginal_gamma(&DensityMatrix::maximally_mixed(6), 2, 1).is_err());
    }

    #[test]
    fn zeta_matches_marginal_and_closed_form() {
        let z = 0.8;
        let m = marginal_gamma(&phi_state(z).unwrap(), 2, 1).unwrap();
        assert!(m.max_abs_diff(&zeta(z).unwrap()) < 1e-15);
        let mut expected = ComplexMatrix::ones(3).scale_real(z / 3.0);
        expected[(2, 2)] += C64::new(1.0 - z, 0.0);
        assert!(m.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn catalyst_blocks_for_three_copies() {
        let (r, s) = (tau(), sigma());
        let cat = build_catalyst(&r, &s.tensor_power(3), 3).unwrap();
        let expected = [s.tensor_power(2), r.tensor(&s), r.tensor_power(2)];
        for (b, e) in cat.blocks().iter().zip(&expected) {
            assert!((b.weight - 1.0 / 3.0).abs() < 1e-15);
            assert!(b.state.max_abs_diff(e) < 1e-15);
        }
    }

    #[test]
    fn catalyst_for_trivial_transformation() {
        let r = sigma();
        let cat = build_catalyst(&r, &r.tensor_power(3), 3).unwrap();
        for b in cat.blocks() {
            assert!(b.state.max_abs_diff(&r.tensor_power(2)) < 1e-15);
        }
    }

    #[test]
    fn qutrit_catalyst_and_step1() {
        let z = 0.9;
        let psi = psi_state();
        let phi = phi_state(z).unwrap();
        let cat = build_catalyst(&psi, &phi, 2).unwrap();
        assert!(cat.blocks()[0].state.max_abs_diff(&zeta(z).unwrap()) < 1e-15);
        assert!(cat.blocks()[1].state.max_abs_diff(&psi) < 1e-15);

        let input = attach_system(&psi, &cat).unwrap();
        let mu1 = step1_measure_apply(&input, &phi).unwrap();
        assert!(mu1.blocks()[0].state.max_abs_diff(&psi.tensor(&zeta(z).unwrap())) < 1e-15);
        assert!(mu1.blocks()[1].state.max_abs_diff(&phi) < 1e-15);
        assert_eq!(mu1.weights(), input.weights());
    }

    #[test]
    fn step1_with_trivial_target_is_identity() {
        let r = sigma();
        let g = r.tensor_power(2);
        let input = attach_system(&r, &build_catalyst(&r, &g, 2).unwrap()).unwrap();
        assert_eq!(step1_measure_apply(&input, &g).unwrap(), input);
    }

    #[test]
    fn flag_cycle_has_order_n() {
        let r = tau();
        let g = sigma().tensor_power(4);
        let input = attach_system(&r, &build_catalyst(&r, &g, 4).unwrap()).unwrap();
        let mut s = input.clone();
        for _ in 0..4 {
            s = step2_cycle_flag(&s);
        }
        assert_eq!(s, input);
    }

    #[test]
    fn beta_block_structure() {
        let z = 0.85;
        let trace = run_protocol(&psi_state(), &phi_state(z).unwrap(), 2).unwrap();
        let beta = &trace.after_step3;
        let phi = phi_state(z).unwrap();
        let zeta_psi = zeta(z).unwrap().tensor(&psi_state());
        assert!(beta.blocks()[0].state.max_abs_diff(&phi) < 1e-12);
        assert!(beta.blocks()[1].state.max_abs_diff(&zeta_psi) < 1e-12);
        assert!(trace.catalyst_restored_error < 1e-12);
        assert!(trace.processed.max_abs_diff(&closed_form_rho_prime(z).unwrap()) < 1e-12);
    }

    #[test]
    fn step3_twice_is_identity_at_two_copies() {
        let z = 0.8;
        let trace = run_protocol(&psi_state(), &phi_state(z).unwrap(), 2).unwrap();
        let back = step3_cycle_systems(&trace.after_step3).unwrap();
        for (a, b) in back.blocks().iter().zip(trace.after_step2.blocks()) {
            assert!(a.state.max_abs_diff(&b.state) < 1e-15);
        }
    }

    #[test]
    fn step3_leaves_symmetric_products() {
        let s = sigma();
        let g = s.tensor_power(3);
        let input = attach_system(&s, &build_catalyst(&s, &g, 3).unwrap()).unwrap();
        let out = step3_cycle_systems(&input).unwrap();
        for (a, b) in out.blocks().iter().zip(input.blocks()) {
            assert!(a.state.max_abs_diff(&b.state) < 1e-15);
        }
    }

    #[test]
    fn generic_target_restores_catalyst_at_three_copies() {
        // correlated, non-symmetric target on three qubits
        let v: Vec<C64> = (0..8).map(|i| C64::new(1.0 + i as f64, 0.3 * i as f64)).collect();
        let gamma = DensityMatrix::pure(&v).unwrap();
        let rho = sigma();
        let trace = run_protocol(&rho, &gamma, 3).unwrap();
        assert!(trace.catalyst_restored_error < 1e-12);
        let expected = processed_state(&gamma, 3).unwrap();
        assert!(trace.processed.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn processed_state_examples() {
        let s = sigma();
        assert!(processed_state(&s.tensor_power(3), 3).unwrap().max_abs_diff(&s) < 1e-14);
        for z in [0.75, 0.8, 0.93, 1.0] {
            let rp = processed_state(&phi_state(z).unwrap(), 2).unwrap();
            let half = (&zeta(z).unwrap().into_matrix() + &zeta_prime(z).unwrap().into_matrix())
                .scale_real(0.5);
            assert!(rp.max_abs_diff(&half) < 1e-15);
            assert!(rp.max_abs_diff(&closed_form_rho_prime(z).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn closed_form_substitutions() {
        let r = closed_form_rho_prime(0.75).unwrap();
        assert!((r[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((r[(1, 1)].re - 0.25).abs() < 1e-15);
        // sqrt(3/16) / (2 sqrt3) = 1/8
        assert!((r[(0, 1)].re - 0.25).abs() < 1e-15);
        let r = closed_form_rho_prime(1.0).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[
            vec![2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
            vec![1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0],
            vec![1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0],
        ])
        .unwrap();
        assert!(r.max_abs_diff(&expected) < 1e-15);
        assert!(closed_form_rho_prime(1.1).is_err());
    }

    #[test]
    fn qutrit_example_values() {
        let ex = run_qutrit_example(0.9, 0.2).unwrap();
        assert!((ex.cf_direct - cf_direct_formula(0.2)).abs() < 1e-9);
        assert!((ex.cf_processed - cf_processed_formula(0.9, 0.2)).abs() < 1e-6);
        assert!(ex.cf_processed > ex.cf_direct);
        let full = run_qutrit_example(0.8, 1.0).unwrap();
        assert!((full.cf_direct - 1.0 / 3.0).abs() < 1e-9);
        assert!((full.cf_processed - 1.0 / 3.0).abs() < 1e-9);
        assert!(matches!(run_qutrit_example(0.7, 0.2), Err(Error::GateRefused(_))));
        assert!(run_qutrit_example(0.9, 1.5).is_err());
    }

    #[test]
    fn cq_matrix_is_state() {
        let trace = run_protocol(&psi_state(), &phi_state(0.8).unwrap(), 2).unwrap();
        let m = trace.after_step3.to_matrix().unwrap();
        assert!(DensityMatrix::new(m).is_ok());
    }
}
