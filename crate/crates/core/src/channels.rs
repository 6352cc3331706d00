//! Kraus channels, structural classification (MIO/IO/SIO/Schur form),
//! superoperators and the quantum addition channel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{
    eig_hermitian, is_permutation, partial_trace, ComplexMatrix, DensityMatrix, C64, ONE, ZERO,
};
use crate::DEFAULT_TOL;

/// Relative threshold for "nonzero" entries in the IO/SIO structure tests.
const STRUCTURE_REL_TOL: f64 = 1e-10;

/// CPTP map in Kraus form on a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
    tol: f64,
}

impl KrausChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tol(kraus, DEFAULT_TOL)
    }

    /// Checks `sum_n K_n^dagger K_n = I` within `tol` (Frobenius).
    pub fn with_tol(kraus: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return Err(Error::Structure("a channel needs at least one Kraus operator".into()));
        };
        let dim = first.dim();
        if kraus.iter().any(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch("Kraus operators of different sizes".into()));
        }
        let mut sum = ComplexMatrix::zeros(dim);
        for k in &kraus {
            k.check_finite()?;
            sum += &k.adjoint().matmul(k);
        }
        let deviation = (&sum - &ComplexMatrix::identity(dim)).frobenius_norm();
        if deviation > tol {
            return Err(Error::Incomplete { deviation });
        }
        Ok(Self { dim, kraus, tol })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kraus: vec![ComplexMatrix::identity(dim)],
            tol: DEFAULT_TOL,
        }
    }

    /// Unitary channel `rho -> U rho U^dagger`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dim_in(&self) -> usize {
        self.dim
    }

    pub fn dim_out(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Linear extension `X -> sum_n K_n X K_n^dagger` to arbitrary matrices.
    pub fn apply_linear(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.dim(), self.dim, "channel input dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.dim);
        for k in &self.kraus {
            out += &k.conjugate(x);
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "channel on dimension {} applied to a {}-dimensional state",
                self.dim,
                rho.dim()
            )));
        }
        DensityMatrix::with_tol(self.apply_linear(rho.matrix()), self.tol.max(rho.tol()))
    }

    /// `self` after `first`: `rho -> self(first(rho))`.
    pub fn compose_after(&self, first: &KrausChannel) -> Result<KrausChannel> {
        if self.dim != first.dim {
            return Err(Error::DimensionMismatch("composing channels of different dimension".into()));
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| first.kraus.iter().map(move |b| a.matmul(b)))
            .collect();
        KrausChannel::with_tol(kraus, self.tol.max(first.tol))
    }
}

fn is_nonzero(z: C64, scale: f64) -> bool {
    z.norm() > STRUCTURE_REL_TOL * scale
}

fn max_per_column(k: &ComplexMatrix) -> usize {
    let scale = k.max_abs();
    let n = k.dim();
    (0..n)
        .map(|j| (0..n).filter(|&i| is_nonzero(k[(i, j)], scale)).count())
        .max()
        .unwrap_or(0)
}

fn max_per_row(k: &ComplexMatrix) -> usize {
    let scale = k.max_abs();
    let n = k.dim();
    (0..n)
        .map(|i| (0..n).filter(|&j| is_nonzero(k[(i, j)], scale)).count())
        .max()
        .unwrap_or(0)
}

/// Every Kraus operator has at most one nonzero entry per column.
pub fn is_io(ch: &KrausChannel) -> bool {
    ch.kraus.iter().all(|k| max_per_column(k) <= 1)
}

/// Every Kraus operator has at most one nonzero entry per row and per column.
pub fn is_sio(ch: &KrausChannel) -> bool {
    ch.kraus
        .iter()
        .all(|k| max_per_column(k) <= 1 && max_per_row(k) <= 1)
}

/// Schur multiplier channel, optionally followed by a basis permutation:
/// `X -> U (C . X) U^dagger` with `U|i> = |perm[i]>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurChannel {
    coeff: ComplexMatrix,
    perm: Vec<usize>,
}

impl SchurChannel {
    pub fn new(coeff: ComplexMatrix) -> Result<Self> {
        let d = coeff.dim();
        Self::with_perm(coeff, (0..d).collect())
    }

    /// Validates `coeff >= 0`, unit diagonal and `perm` a bijection.
    pub fn with_perm(coeff: ComplexMatrix, perm: Vec<usize>) -> Result<Self> {
        let d = coeff.dim();
        if perm.len() != d || !is_permutation(&perm) {
            return Err(Error::Structure(format!("{perm:?} is not a permutation of 0..{d}")));
        }
        for i in 0..d {
            if (coeff[(i, i)] - ONE).norm() > DEFAULT_TOL {
                return Err(Error::OutOfRange(format!(
                    "Schur coefficient diagonal entry {i} is {}, expected 1",
                    coeff[(i, i)]
                )));
            }
        }
        let deviation = coeff.hermiticity_error();
        if deviation > DEFAULT_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let coeff = coeff.hermitian_part();
        let min = eig_hermitian(&coeff)?.min();
        if min < -DEFAULT_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { coeff, perm })
    }

    pub fn coeff(&self) -> &ComplexMatrix {
        &self.coeff
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn dim(&self) -> usize {
        self.coeff.dim()
    }

    /// Permutation unitary with `U|i> = |perm[i]>`.
    pub fn permutation_unitary(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut u = ComplexMatrix::zeros(d);
        for (i, &p) in self.perm.iter().enumerate() {
            u[(p, i)] = ONE;
        }
        u
    }

    pub fn apply_linear(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let masked = self.coeff.hadamard(x).expect("matching dimensions");
        if self.perm.iter().enumerate().all(|(i, &p)| i == p) {
            masked
        } else {
            self.permutation_unitary().conjugate(&masked)
        }
    }
}

/// Diagonal Kraus operators for a Schur channel: `C = sum_k l_k u_k u_k^dagger`
/// gives `K_k = sqrt(l_k) diag(u_k)` (then the permutation, if any).
pub fn schur_kraus(c: &SchurChannel) -> Result<KrausChannel> {
    let spectrum = eig_hermitian(c.coeff())?;
    let top = spectrum.max();
    let u = c.permutation_unitary();
    let mut kraus = Vec::new();
    for (k, &l) in spectrum.eigenvalues.iter().enumerate() {
        if l < -DEFAULT_TOL {
            return Err(Error::NotPositive { min_eigenvalue: l });
        }
        if l <= 1e-14 * top.max(1.0) {
            continue;
        }
        let diag: Vec<C64> = spectrum.vector(k).iter().map(|z| z * l.sqrt()).collect();
        kraus.push(u.matmul(&ComplexMatrix::diag(&diag)));
    }
    KrausChannel::new(kraus)
}

/// Structural classification of a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelClass {
    pub is_mio_on_basis: bool,
    pub is_io: bool,
    pub is_sio: bool,
    pub schur_form: Option<SchurChannel>,
}

/// Probes the channel on basis projectors and matrix units.
///
/// A Schur form `E(|i><j|) = c_ij |pi(i)><pi(j)|` is reported when every
/// image is supported on at most the single entry `(pi(i), pi(j))`, each
/// diagonal image is exactly one basis projector, `pi` is a bijection and the
/// recovered `[c_ij]` is PSD with unit diagonal. Off-diagonal images may vanish
/// (`c_ij = 0`).
pub fn classify(ch: &KrausChannel) -> ChannelClass {
    let d = ch.dim();
    let tol = ch.tol().max(DEFAULT_TOL);
    let images: Vec<ComplexMatrix> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| ch.apply_linear(&ComplexMatrix::unit(d, i, j)))
        .collect();
    let image = |i: usize, j: usize| &images[i * d + j];

    let is_mio_on_basis = (0..d).all(|i| image(i, i).off_diagonal_l1() <= tol);
    let io = is_io(ch);
    let sio = is_sio(ch);

    let schur_form = if sio { recover_schur(d, &image, tol) } else { None };

    ChannelClass {
        is_mio_on_basis,
        is_io: io,
        is_sio: sio,
        schur_form,
    }
}

fn recover_schur<'a>(
    d: usize,
    image: &impl Fn(usize, usize) -> &'a ComplexMatrix,
    tol: f64,
) -> Option<SchurChannel> {
    let support = |m: &ComplexMatrix| -> Vec<(usize, usize)> {
        let mut s = Vec::new();
        for a in 0..d {
            for b in 0..d {
                if m[(a, b)].norm() > tol {
                    s.push((a, b));
                }
            }
        }
        s
    };
    let mut perm = vec![0; d];
    for (i, slot) in perm.iter_mut().enumerate() {
        match support(image(i, i)).as_slice() {
            [(a, b)] if a == b && (image(i, i)[(*a, *a)] - ONE).norm() <= tol => *slot = *a,
            _ => return None,
        }
    }
    if !is_permutation(&perm) {
        return None;
    }
    let mut coeff = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let m = image(i, j);
            let (a, b) = (perm[i], perm[j]);
            if support(m).iter().any(|&e| e != (a, b)) {
                return None;
            }
            coeff[(i, j)] = if i == j { ONE } else { m[(a, b)] };
        }
    }
    SchurChannel::with_perm(coeff, perm).ok()
}

/// `||E(rho) E(sigma) - E(rho sigma)||_F` for diagonal `sigma`.
pub fn multiplicativity_deviation(
    ch: &KrausChannel,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<f64> {
    if rho.dim() != ch.dim() || sigma.dim() != ch.dim() {
        return Err(Error::DimensionMismatch("state and channel dimensions differ".into()));
    }
    let off = sigma.off_diagonal_l1();
    if off > sigma.tol() {
        return Err(Error::NotIncoherent { off_diagonal: off });
    }
    let lhs = ch.apply_linear(rho).matmul(&ch.apply_linear(sigma));
    let rhs = ch.apply_linear(&rho.matmul(sigma));
    Ok((&lhs - &rhs).frobenius_norm())
}

/// Completely dephasing channel on `dim` levels.
pub fn complete_dephasing(dim: usize) -> KrausChannel {
    KrausChannel {
        dim,
        kraus: (0..dim).map(|i| ComplexMatrix::unit(dim, i, i)).collect(),
        tol: DEFAULT_TOL,
    }
}

/// Dephasing with strength `p` on `dim` levels: `(1-p) rho + p Delta(rho)`.
pub fn dephasing_channel_dim(dim: usize, p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("dephasing strength {p} outside [0, 1]")));
    }
    let mut kraus = vec![ComplexMatrix::identity(dim).scale_real((1.0 - p).sqrt())];
    kraus.extend((0..dim).map(|i| ComplexMatrix::unit(dim, i, i).scale_real(p.sqrt())));
    KrausChannel::new(kraus)
}

/// Qutrit phase-damping channel with Kraus operators
/// `sqrt(1-p) I, sqrt(p)|0><0|, sqrt(p)|1><1|, sqrt(p)|2><2|`.
pub fn dephasing_channel(p: f64) -> Result<KrausChannel> {
    dephasing_channel_dim(3, p)
}

fn check_addition_inputs(alpha: f64, sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange(format!("addition weight {alpha} outside [0, 1]")));
    }
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch("addition channel inputs differ in dimension".into()));
    }
    Ok(())
}

fn addition_commutator_matrix(alpha: f64, sigma: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let mix = &rho.scale_real(alpha) + &sigma.scale(rho.trace() * (1.0 - alpha));
    let k = C64::new(0.0, -(alpha * (1.0 - alpha)).sqrt());
    &mix + &rho.commutator(sigma).scale(k)
}

/// Quantum addition `alpha rho + (1-alpha) sigma - i sqrt(alpha(1-alpha)) [rho, sigma]`.
pub fn addition_channel_commutator(
    alpha: f64,
    sigma_b: &DensityMatrix,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    check_addition_inputs(alpha, sigma_b, rho)?;
    DensityMatrix::new(addition_commutator_matrix(alpha, sigma_b, rho))
}

/// Swap operator on `C^d (x) C^d`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            s[(j * d + i, i * d + j)] = ONE;
        }
    }
    s
}

/// `U_alpha = sqrt(alpha) I + i sqrt(1-alpha) S`.
pub fn addition_unitary(alpha: f64, d: usize) -> ComplexMatrix {
    &ComplexMatrix::identity(d * d).scale_real(alpha.sqrt())
        + &swap_operator(d).scale(C64::new(0.0, (1.0 - alpha).sqrt()))
}

/// Quantum addition via its dilation, `Tr_B[U_alpha (rho (x) sigma) U_alpha^dagger]`.
pub fn addition_channel_stinespring(
    alpha: f64,
    sigma_b: &DensityMatrix,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    check_addition_inputs(alpha, sigma_b, rho)?;
    let d = rho.dim();
    let joint = addition_unitary(alpha, d).conjugate(&rho.tensor(sigma_b));
    DensityMatrix::new(partial_trace(&joint, &[d, d], &[0])?)
}

/// The addition channel `rho -> rho [+]_alpha sigma` as a Kraus channel:
/// with `sigma = sum_k s_k |e_k><e_k|`, the operators are
/// `sqrt(s_k) (I (x) <e_l|) U_alpha (I (x) |e_k>)`.
pub fn addition_channel(alpha: f64, sigma_b: &DensityMatrix) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange(format!("addition weight {alpha} outside [0, 1]")));
    }
    let d = sigma_b.dim();
    let u = addition_unitary(alpha, d);
    let spectrum = eig_hermitian(sigma_b)?;
    let mut kraus = Vec::new();
    for (k, &s) in spectrum.eigenvalues.iter().enumerate() {
        if s <= 1e-15 {
            continue;
        }
        let ek = spectrum.vector(k);
        for l in 0..d {
            let el = spectrum.vector(l);
            let op = ComplexMatrix::from_fn(d, |a, b| {
                let mut acc = ZERO;
                for x in 0..d {
                    for y in 0..d {
                        acc += el[x].conj() * u[(a * d + x, b * d + y)] * ek[y];
                    }
                }
                acc * s.sqrt()
            });
            kraus.push(op);
        }
    }
    KrausChannel::new(kraus)
}

/// `sum_n K_n (x) conj(K_n)`; acts on row-stacked vectorizations,
/// `vec(E(X)) = S vec(X)` with `vec[i*d + j] = X_ij`.
pub fn superoperator(ch: &KrausChannel) -> ComplexMatrix {
    let d = ch.dim();
    let mut s = ComplexMatrix::zeros(d * d);
    for k in ch.kraus() {
        s += &k.tensor(&k.conj());
    }
    s
}

/// Whether the superoperators commute, `||S_a S_b - S_b S_a||_F <= tol (1 + ||S_a|| ||S_b||)`.
pub fn channels_commute(a: &KrausChannel, b: &KrausChannel) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch("channels of different dimension".into()));
    }
    let sa = superoperator(a);
    let sb = superoperator(b);
    let comm = sa.commutator(&sb).frobenius_norm();
    let tol = a.tol().max(b.tol());
    Ok(comm <= tol * (1.0 + sa.frobenius_norm() * sb.frobenius_norm()))
}

/// Max deviation between `a(b(X))` and `b(a(X))` over matrix units.
pub fn composition_gap(a: &KrausChannel, b: &KrausChannel) -> f64 {
    let d = a.dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let e = ComplexMatrix::unit(d, i, j);
            let ab = a.apply_linear(&b.apply_linear(&e));
            let ba = b.apply_linear(&a.apply_linear(&e));
            worst = worst.max((&ab - &ba).frobenius_norm());
        }
    }
    worst
}

/// Max Frobenius deviation between two channels over the matrix-unit basis.
pub fn channel_distance(a: &KrausChannel, b: &KrausChannel) -> f64 {
    let d = a.dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let e = ComplexMatrix::unit(d, i, j);
            worst = worst.max((&a.apply_linear(&e) - &b.apply_linear(&e)).frobenius_norm());
        }
    }
    worst
}

/// The non-Schur SIO pair `K1 = diag(1, sqrt(0.6))`, `K2 = sqrt(0.4)|0><1|`.
pub fn non_schur_sio_fixture() -> KrausChannel {
    let k1 = ComplexMatrix::diag_real(&[1.0, 0.6f64.sqrt()]);
    let mut k2 = ComplexMatrix::zeros(2);
    k2[(0, 1)] = C64::new(0.4f64.sqrt(), 0.0);
    KrausChannel::new(vec![k1, k2]).expect("complete by construction")
}

/// Channel file: `{"dim": n, "kraus": [literal, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim: usize,
    pub kraus: Vec<ComplexMatrix>,
}

/// Schur channel file: `{"coeff": literal, "perm": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchurFile {
    pub coeff: ComplexMatrix,
    #[serde(default)]
    pub perm: Option<Vec<usize>>,
}

/// Either file format; the Kraus form is built for Schur files.
pub fn parse_channel_json(json: &str) -> Result<KrausChannel> {
    let value: serde_json::Value = serde_json::from_str(json)?;
    if value.get("kraus").is_some() {
        let file: ChannelFile = serde_json::from_str(json)?;
        if file.kraus.iter().any(|k| k.dim() != file.dim) {
            return Err(Error::Parse(format!("Kraus operators must be {0}x{0}", file.dim)));
        }
        KrausChannel::new(file.kraus)
    } else if value.get("coeff").is_some() {
        let file: SchurFile = serde_json::from_str(json)?;
        let d = file.coeff.dim();
        let perm = file.perm.unwrap_or_else(|| (0..d).collect());
        schur_kraus(&SchurChannel::with_perm(file.coeff, perm)?)
    } else {
        Err(Error::Parse("expected a `kraus` or `coeff` key".into()))
    }
}

impl From<&KrausChannel> for ChannelFile {
    fn from(ch: &KrausChannel) -> Self {
        Self {
            dim: ch.dim(),
            kraus: ch.kraus().to_vec(),
        }
    }
}
