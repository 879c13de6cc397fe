//! Generic multiqudit states as (seed, local operator) pairs: optimal
//! conversion probability, the product-state monotones E_x, intermediate-state
//! criteria, the differential path-optimality defect, and operator
//! reconstruction from monotone fingerprints.
//!
//! Every global spectral quantity is reduced to per-party d×d Hermitian
//! problems; the d^n-dimensional space is touched only through axis-wise
//! contractions with the seed amplitudes.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::path::{MultiPathKind, MultipartitePath, PathSpec, ScheduleForm};
use crate::spectra::{self, ComplexMatrix, HermitianPD, SpectraError};

/// Largest allowed global dimension d^n for stored seed amplitudes.
pub const MAX_GLOBAL_DIM: usize = 4096;
/// Largest allowed unknown count (d²)^n for the fingerprint linear solve.
pub const MAX_FINGERPRINT_UNKNOWNS: usize = 256;

#[derive(Debug, Error)]
pub enum MultiError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operation requires a multipartite path")]
    WrongFamily,
    #[error("schedule is not monotonically nonincreasing: {0}")]
    ScheduleNotMonotone(String),
    #[error("path is not differentiable at t = {t} (segment joint)")]
    NonDifferentiablePoint { t: f64 },
    #[error("product projectors do not span the operator space")]
    RankDeficientFrame,
    #[error("input too large: {0}")]
    InputTooLarge(String),
    #[error("Kraus operator produces a singular posterior")]
    SingularKraus,
    #[error("seed amplitudes must be normalized (norm {0})")]
    SeedNotNormalized(f64),
    #[error("invalid descriptor: {0}")]
    BadDescriptor(String),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// Per-party Hermitian positive-definite Gram factors G_i = g_i†g_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalPSDOperator {
    parties: Vec<HermitianPD>,
}

impl LocalPSDOperator {
    pub fn new(parties: Vec<HermitianPD>) -> Result<Self, MultiError> {
        if parties.is_empty() {
            return Err(MultiError::DimensionMismatch("no parties".into()));
        }
        let d = parties[0].dim();
        if parties.iter().any(|p| p.dim() != d) {
            return Err(MultiError::DimensionMismatch(
                "party dimensions differ".into(),
            ));
        }
        Ok(Self { parties })
    }

    pub fn identity(n: usize, d: usize) -> Self {
        Self {
            parties: vec![HermitianPD::identity(d); n],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.parties.len()
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.parties[0].dim()
    }

    pub fn party(&self, i: usize) -> &HermitianPD {
        &self.parties[i]
    }

    pub fn parties(&self) -> &[HermitianPD] {
        &self.parties
    }

    pub fn with_party(&self, i: usize, factor: HermitianPD) -> Self {
        let mut parties = self.parties.clone();
        parties[i] = factor;
        Self { parties }
    }

    /// λ_max(⊗G_i) = Π λ_max(G_i).
    pub fn lambda_max(&self) -> f64 {
        spectra::tensor_lambda_max(&self.parties).expect("nonempty by construction")
    }

    /// Each factor rescaled to λ_max = 1.
    pub fn normalized_per_party(&self) -> Self {
        Self {
            parties: self
                .parties
                .iter()
                .map(|p| p.scale(1.0 / p.lambda_max()))
                .collect(),
        }
    }

    /// True when every factor already satisfies λ_max = 1 within `tol`.
    pub fn is_party_normalized(&self, tol: f64) -> bool {
        self.parties.iter().all(|p| (p.lambda_max() - 1.0).abs() <= tol)
    }

    fn check_shape(&self, other: &Self) -> Result<(), MultiError> {
        if self.n() != other.n() || self.d() != other.d() {
            return Err(MultiError::DimensionMismatch(format!(
                "{}x{} parties vs {}x{}",
                self.n(),
                self.d(),
                other.n(),
                other.d()
            )));
        }
        Ok(())
    }
}

fn seed_to_wire(seed: &[Complex64]) -> Vec<[f64; 2]> {
    seed.iter().map(|z| [z.re, z.im]).collect()
}

fn seed_from_wire(wire: &[[f64; 2]]) -> Vec<Complex64> {
    wire.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

/// A state |Ψ⟩ = g|Ψ_s⟩ in the SLOCC class of the seed |Ψ_s⟩, stored as the
/// dense seed amplitudes plus the Gram operator G = g†g.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericStateDescriptor {
    n: usize,
    d: usize,
    seed: Vec<Complex64>,
    op: LocalPSDOperator,
    pub generic_asserted: bool,
}

#[derive(Serialize, Deserialize)]
struct DescriptorWire {
    n: usize,
    d: usize,
    seed: Vec<[f64; 2]>,
    g: LocalPSDOperator,
    generic_asserted: bool,
}

impl Serialize for GenericStateDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DescriptorWire {
            n: self.n,
            d: self.d,
            seed: seed_to_wire(&self.seed),
            g: self.op.clone(),
            generic_asserted: self.generic_asserted,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GenericStateDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = DescriptorWire::deserialize(de)?;
        GenericStateDescriptor::new(
            wire.n,
            wire.d,
            seed_from_wire(&wire.seed),
            wire.g,
            wire.generic_asserted,
        )
        .map_err(D::Error::custom)
    }
}

impl GenericStateDescriptor {
    pub fn new(
        n: usize,
        d: usize,
        seed: Vec<Complex64>,
        op: LocalPSDOperator,
        generic_asserted: bool,
    ) -> Result<Self, MultiError> {
        if n == 0 || d == 0 {
            return Err(MultiError::BadDescriptor("n and d must be positive".into()));
        }
        let dim = (d as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
        if dim > MAX_GLOBAL_DIM as u64 {
            return Err(MultiError::InputTooLarge(format!(
                "d^n = {dim} exceeds {MAX_GLOBAL_DIM}"
            )));
        }
        if seed.len() != dim as usize {
            return Err(MultiError::BadDescriptor(format!(
                "seed length {} != d^n = {dim}",
                seed.len()
            )));
        }
        let norm: f64 = seed.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(MultiError::SeedNotNormalized(norm));
        }
        if op.n() != n || op.d() != d {
            return Err(MultiError::DimensionMismatch(format!(
                "operator is {}x{}, descriptor is {}x{}",
                op.n(),
                op.d(),
                n,
                d
            )));
        }
        Ok(Self {
            n,
            d,
            seed,
            op,
            generic_asserted,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> &[Complex64] {
        &self.seed
    }

    pub fn op(&self) -> &LocalPSDOperator {
        &self.op
    }

    pub fn with_op(&self, op: LocalPSDOperator) -> Result<Self, MultiError> {
        Self::new(self.n, self.d, self.seed.clone(), op, self.generic_asserted)
    }

    /// ‖g|Ψ_s⟩‖² = ⟨Ψ_s| ⊗G_i |Ψ_s⟩.
    pub fn norm_sq(&self) -> f64 {
        seed_quadratic_form(&self.seed, self.n, self.d, self.op.parties())
    }

    /// Rescales the operator so the represented state is normalized
    /// (the scalar is absorbed into the first party).
    pub fn normalized(&self) -> Self {
        let ns = self.norm_sq();
        let mut out = self.clone();
        out.op = self.op.with_party(0, self.op.party(0).scale(1.0 / ns));
        out
    }
}

/// Product state |x⟩ = |x_1⟩ ⊗ ... ⊗ |x_n⟩ with unit-norm factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    factors: Vec<Vec<Complex64>>,
}

#[derive(Serialize, Deserialize)]
struct ProductStateWire {
    factors: Vec<Vec<[f64; 2]>>,
}

impl Serialize for ProductState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ProductStateWire {
            factors: self.factors.iter().map(|f| seed_to_wire(f)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProductState {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = ProductStateWire::deserialize(de)?;
        ProductState::new(wire.factors.iter().map(|f| seed_from_wire(f)).collect())
            .map_err(D::Error::custom)
    }
}

impl ProductState {
    pub fn new(factors: Vec<Vec<Complex64>>) -> Result<Self, MultiError> {
        if factors.is_empty() {
            return Err(MultiError::BadDescriptor("no factors".into()));
        }
        for f in &factors {
            let norm: f64 = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(MultiError::BadDescriptor(format!(
                    "factor norm {norm} != 1"
                )));
            }
        }
        Ok(Self { factors })
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn d(&self) -> usize {
        self.factors[0].len()
    }

    pub fn factor(&self, i: usize) -> &[Complex64] {
        &self.factors[i]
    }

    /// Computational basis product state |i_1 ... i_n⟩.
    pub fn basis(n: usize, d: usize, digits: &[usize]) -> Self {
        let factors = digits
            .iter()
            .map(|&k| {
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[k] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        assert_eq!(digits.len(), n);
        Self { factors }
    }
}

/// Applies a one-party matrix along the given axis of the amplitude tensor
/// (row-major, party 0 most significant).
pub fn apply_on_party(
    state: &[Complex64],
    n: usize,
    d: usize,
    party: usize,
    m: &ComplexMatrix,
) -> Vec<Complex64> {
    debug_assert_eq!(state.len(), d.pow(n as u32));
    debug_assert_eq!(m.dim(), d);
    let stride = d.pow((n - 1 - party) as u32);
    let block = stride * d;
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    let mut base = 0;
    while base < state.len() {
        for off in 0..stride {
            for i in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    acc += m.get(i, j) * state[base + j * stride + off];
                }
                out[base + i * stride + off] = acc;
            }
        }
        base += block;
    }
    out
}

/// ⟨s| ⊗A_i |s⟩ for Hermitian factors, evaluated by axis-wise contraction.
pub fn seed_quadratic_form(seed: &[Complex64], n: usize, d: usize, factors: &[HermitianPD]) -> f64 {
    let mut v = seed.to_vec();
    for (party, f) in factors.iter().enumerate() {
        v = apply_on_party(&v, n, d, party, f.matrix());
    }
    seed.iter()
        .zip(v.iter())
        .map(|(a, b)| (a.conj() * b).re)
        .sum()
}

/// Optimal conversion probability for generic states,
/// P = (‖Φ‖²/‖Ψ‖²) / λ_max(G⁻¹H). The flag is true when the caller asserted
/// genericity; otherwise the value is a lower bound.
pub fn max_prob_generic(
    psi: &GenericStateDescriptor,
    h_op: &LocalPSDOperator,
) -> Result<(f64, bool), MultiError> {
    psi.op().check_shape(h_op)?;
    let mut rel = 1.0;
    for i in 0..psi.n() {
        rel *= spectra::relative_eig_max(psi.op().party(i), h_op.party(i))?;
    }
    let target = psi.with_op(h_op.clone())?;
    let p = (target.norm_sq() / psi.norm_sq()) / rel;
    Ok((p.min(1.0), psi.generic_asserted))
}

/// Entanglement monotone E_x(Ψ) = ⟨x|G|x⟩ = Π_i ⟨x_i|G_i|x_i⟩ for a
/// normalized state; the caller is responsible for the normalization of the
/// descriptor (see [`GenericStateDescriptor::normalized`]).
pub fn monotone_ex(psi: &GenericStateDescriptor, x: &ProductState) -> Result<f64, MultiError> {
    if x.n() != psi.n() || x.d() != psi.d() {
        return Err(MultiError::DimensionMismatch(format!(
            "product state is {}x{}, descriptor is {}x{}",
            x.n(),
            x.d(),
            psi.n(),
            psi.d()
        )));
    }
    let mut acc = 1.0;
    for i in 0..psi.n() {
        acc *= psi.op().party(i).matrix().quadratic_form(x.factor(i)).re;
    }
    Ok(acc)
}

/// Result of the min-ratio evaluation of the success probability.
#[derive(Debug, Clone, Serialize)]
pub struct MinRatioReport {
    /// Per-party generalized-eigenvector closed form; equals the λ_max formula.
    pub closed_form: f64,
    /// Minimum of the normalized monotone ratio over random product samples.
    pub sampled_min: f64,
    /// Ratio after per-party refinement of the best sample (exact minimizer).
    pub refined_min: f64,
    pub samples: usize,
}

/// min_x E_x(Ψ)/E_x(Φ) over product states, with Monte-Carlo cross-check.
///
/// The ratio factorizes over parties, so the closed form is the product of the
/// per-party minimal generalized Rayleigh quotients, and the refinement step
/// replaces each factor by the exact per-party minimizer.
pub fn min_ratio_over_products(
    psi: &GenericStateDescriptor,
    h_op: &LocalPSDOperator,
    samples: usize,
    refine: bool,
    rng: &mut impl Rng,
) -> Result<MinRatioReport, MultiError> {
    psi.op().check_shape(h_op)?;
    let (closed_form, _) = max_prob_generic(psi, h_op)?;
    let target = psi.with_op(h_op.clone())?;
    let norm_ratio = target.norm_sq() / psi.norm_sq();
    let n = psi.n();
    let d = psi.d();

    let ratio_of = |x: &ProductState| -> f64 {
        let mut acc = norm_ratio;
        for i in 0..n {
            let num = psi.op().party(i).matrix().quadratic_form(x.factor(i)).re;
            let den = h_op.party(i).matrix().quadratic_form(x.factor(i)).re;
            acc *= num / den;
        }
        acc
    };

    // The per-party Rayleigh ratio is scale invariant, so the sampler skips
    // normalization, reuses one scratch vector and draws uniform complex-cube
    // components straight from the raw generator words (full support is all
    // that matters for the lower-bound probe).
    let mut scratch = vec![Complex64::new(0.0, 0.0); d];
    let mut sampled_min = f64::INFINITY;
    const SCALE: f64 = 2.0 / 4_294_967_296.0;
    for _ in 0..samples {
        let mut acc = norm_ratio;
        for i in 0..n {
            for z in scratch.iter_mut() {
                let word = rng.next_u64();
                *z = Complex64::new(
                    (word & 0xFFFF_FFFF) as f64 * SCALE - 1.0,
                    (word >> 32) as f64 * SCALE - 1.0,
                );
            }
            let num = quad_form_inline(psi.op().party(i).matrix(), &scratch);
            let den = quad_form_inline(h_op.party(i).matrix(), &scratch);
            if den <= 0.0 {
                acc = f64::INFINITY;
                break;
            }
            acc *= num / den;
        }
        sampled_min = sampled_min.min(acc);
    }
    if samples == 0 {
        sampled_min = norm_ratio
            * (0..n)
                .map(|i| {
                    psi.op().party(i).matrix().quadratic_form(&basis_vec(d, 0)).re
                        / h_op.party(i).matrix().quadratic_form(&basis_vec(d, 0)).re
                })
                .product::<f64>();
    }

    let refined_min = if refine {
        let factors: Result<Vec<Vec<Complex64>>, MultiError> = (0..n)
            .map(|i| min_ratio_eigvec(psi.op().party(i), h_op.party(i)))
            .collect();
        ratio_of(&ProductState::new(factors?)?)
    } else {
        sampled_min
    };

    Ok(MinRatioReport {
        closed_form,
        sampled_min,
        refined_min,
        samples,
    })
}

/// ⟨x|M|x⟩ for Hermitian M without intermediate allocations (hot sampling
/// loop): diagonal plus twice the real part of the upper triangle.
fn quad_form_inline(m: &ComplexMatrix, x: &[Complex64]) -> f64 {
    let d = x.len();
    let mut acc = 0.0;
    for i in 0..d {
        let xi = x[i];
        acc += m.get(i, i).re * (xi.re * xi.re + xi.im * xi.im);
        for j in (i + 1)..d {
            let mij = m.get(i, j);
            let xj = x[j];
            let zr = xi.re * xj.re + xi.im * xj.im;
            let zi = xi.re * xj.im - xi.im * xj.re;
            acc += 2.0 * (mij.re * zr - mij.im * zi);
        }
    }
    acc
}

fn basis_vec(d: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// argmin_x ⟨x|G|x⟩/⟨x|H|x⟩ = H^{-1/2}·(bottom eigenvector of H^{-1/2}GH^{-1/2}).
fn min_ratio_eigvec(g: &HermitianPD, h: &HermitianPD) -> Result<Vec<Complex64>, MultiError> {
    let s = h.inv_sqrt();
    let m = s.mul(g.matrix()).mul(&s).symmetrized();
    let eig = spectra::eig_hermitian(&m)?;
    let d = g.dim();
    let bottom: Vec<Complex64> = (0..d).map(|r| eig.vectors.get(r, 0)).collect();
    let x = s.apply(&bottom);
    let norm: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(x.into_iter().map(|z| z / norm).collect())
}

/// Intermediate-state criterion for generic states:
/// χ = gΨ is an optimal intermediate of Ψ → hΨ iff
/// λ_max(G⁻¹H) = λ_max(H)/λ_max(G), compared on logarithms within 1e-10.
pub fn is_intermediate_generic(
    g_op: &LocalPSDOperator,
    h_op: &LocalPSDOperator,
) -> Result<bool, MultiError> {
    g_op.check_shape(h_op)?;
    let mut log_rel = 0.0;
    let mut log_ratio = 0.0;
    for i in 0..g_op.n() {
        log_rel += spectra::relative_eig_max(g_op.party(i), h_op.party(i))?.ln();
        log_ratio += h_op.party(i).lambda_max().ln() - g_op.party(i).lambda_max().ln();
    }
    Ok((log_rel - log_ratio).abs() <= 1e-10)
}

/// Per-party record of the sufficient conditions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PartyConditions {
    pub commute: bool,
    pub dominated: bool,
}

/// Sufficient conditions for χ = gΨ to be an optimal intermediate state:
/// per party (i) [G_i, H_i] = 0 and (ii) H_i/λ_max(H_i) ≤ G_i/λ_max(G_i).
/// For qubits these conditions are also necessary.
pub fn sufficient_conditions_check(
    g_op: &LocalPSDOperator,
    h_op: &LocalPSDOperator,
) -> Result<(bool, Vec<PartyConditions>), MultiError> {
    g_op.check_shape(h_op)?;
    let mut per_party = Vec::with_capacity(g_op.n());
    for i in 0..g_op.n() {
        let g = g_op.party(i);
        let h = h_op.party(i);
        let scale = g.lambda_max() * h.lambda_max();
        let comm = g
            .matrix()
            .mul(h.matrix())
            .sub(&h.matrix().mul(g.matrix()));
        let commute = comm.max_abs_entry() <= 1e-10 * scale.max(1.0);
        let diff = g
            .matrix()
            .scale(1.0 / g.lambda_max())
            .sub(&h.matrix().scale(1.0 / h.lambda_max()));
        let dominated = spectra::eig_hermitian(&diff.symmetrized())?.min() >= -1e-10;
        per_party.push(PartyConditions { commute, dominated });
    }
    let holds = per_party.iter().all(|c| c.commute && c.dominated);
    if g_op.d() == 2 {
        debug_assert_eq!(
            holds,
            is_intermediate_generic(g_op, h_op)?,
            "qubit equivalence of the eigenvalue criterion and conditions (i)+(ii)"
        );
    }
    Ok((holds, per_party))
}

/// One branch of a unilocal two-outcome measurement: returns the branch
/// probability (relative to the normalized input state) and the descriptor of
/// the normalized post-measurement state.
pub fn unilocal_posterior(
    psi: &GenericStateDescriptor,
    party: usize,
    kraus: &ComplexMatrix,
) -> Result<(f64, GenericStateDescriptor), MultiError> {
    if party >= psi.n() || kraus.dim() != psi.d() {
        return Err(MultiError::DimensionMismatch(format!(
            "party {party} of {}, Kraus dim {} vs {}",
            psi.n(),
            kraus.dim(),
            psi.d()
        )));
    }
    let g_sqrt = psi.op().party(party).sqrt();
    let m = g_sqrt
        .adjoint()
        .mul(&kraus.adjoint())
        .mul(kraus)
        .mul(&g_sqrt)
        .symmetrized();
    let factor = HermitianPD::new(m).map_err(|_| MultiError::SingularKraus)?;
    let raw = psi.op().with_party(party, factor);
    let raw_norm = seed_quadratic_form(psi.seed(), psi.n(), psi.d(), raw.parties());
    let p = raw_norm / psi.norm_sq();
    let post_op = raw.with_party(party, raw.party(party).scale(1.0 / raw_norm));
    Ok((p, psi.with_op(post_op)?))
}

// ---------------------------------------------------------------------------
// Fingerprints: E_x values on a spanning product frame determine G.
// ---------------------------------------------------------------------------

/// Tomography frame of d² unit vectors per party whose projectors span the
/// Hermitian operators: basis states, pairwise (|j⟩+|k⟩)/√2 and (|j⟩+i|k⟩)/√2.
pub fn party_frame(d: usize) -> Vec<Vec<Complex64>> {
    let mut frame = Vec::with_capacity(d * d);
    for k in 0..d {
        frame.push(basis_vec(d, k));
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            v[j] = Complex64::new(inv_sqrt2, 0.0);
            v[k] = Complex64::new(inv_sqrt2, 0.0);
            frame.push(v);
            let mut w = vec![Complex64::new(0.0, 0.0); d];
            w[j] = Complex64::new(inv_sqrt2, 0.0);
            w[k] = Complex64::new(0.0, inv_sqrt2);
            frame.push(w);
        }
    }
    frame
}

/// All (d²)^n tensor combinations of the per-party frame, lexicographic.
pub fn product_frame(n: usize, d: usize) -> Vec<ProductState> {
    let per_party = party_frame(d);
    let k = per_party.len();
    let total = k.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rest = idx;
        let mut digits = vec![0usize; n];
        for slot in (0..n).rev() {
            digits[slot] = rest % k;
            rest /= k;
        }
        let factors: Vec<Vec<Complex64>> =
            digits.iter().map(|&a| per_party[a].clone()).collect();
        out.push(ProductState { factors });
    }
    out
}

/// Raw monotone values ⟨x|G|x⟩ on the given frame.
pub fn fingerprint(op: &LocalPSDOperator, frame: &[ProductState]) -> Vec<f64> {
    frame
        .iter()
        .map(|x| {
            (0..op.n())
                .map(|i| op.party(i).matrix().quadratic_form(x.factor(i)).re)
                .product()
        })
        .collect()
}

/// Result of reconstructing an operator from monotone samples.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// The reconstructed global operator (dimension d^n).
    pub global: ComplexMatrix,
    /// Per-party factorization when the global operator is a tensor product.
    pub local: Option<LocalPSDOperator>,
    /// True when the positive-definite projection moved an eigenvalue.
    pub perturbed: bool,
    /// Magnitude of the largest eigenvalue clamp applied.
    pub clamp_magnitude: f64,
}

/// Reconstructs the operator G from samples (x, ⟨x|G|x⟩) on a spanning set of
/// product projectors via a least-squares linear solve in the Hermitian
/// coordinates, then symmetrizes and projects onto the positive cone.
pub fn reconstruct_from_fingerprint(
    values: &[(ProductState, f64)],
    n: usize,
    d: usize,
) -> Result<Reconstruction, MultiError> {
    let dim = d.pow(n as u32);
    let unknowns = dim * dim;
    if unknowns > MAX_FINGERPRINT_UNKNOWNS {
        return Err(MultiError::InputTooLarge(format!(
            "(d^n)² = {unknowns} unknowns exceeds {MAX_FINGERPRINT_UNKNOWNS}"
        )));
    }
    if values.len() < unknowns {
        return Err(MultiError::RankDeficientFrame);
    }

    // Row of the design matrix: ⟨x|B_α|x⟩ over the Hermitian basis
    // {E_kk} ∪ {E_jk + E_kj} ∪ {i(E_jk − E_kj)}.
    let mut normal = vec![0.0f64; unknowns * unknowns];
    let mut rhs = vec![0.0f64; unknowns];
    let mut row = vec![0.0f64; unknowns];
    for (x, value) in values {
        if x.n() != n || x.d() != d {
            return Err(MultiError::DimensionMismatch(
                "frame state has wrong shape".into(),
            ));
        }
        let amps = product_amplitudes(x, dim, d);
        let mut col = 0;
        for k in 0..dim {
            row[col] = amps[k].norm_sqr();
            col += 1;
        }
        for j in 0..dim {
            for k in (j + 1)..dim {
                let z = amps[j].conj() * amps[k];
                row[col] = 2.0 * z.re;
                row[col + 1] = -2.0 * z.im;
                col += 2;
            }
        }
        for a in 0..unknowns {
            if row[a] == 0.0 {
                continue;
            }
            rhs[a] += row[a] * value;
            for b in 0..unknowns {
                normal[a * unknowns + b] += row[a] * row[b];
            }
        }
    }

    let coeffs = solve_linear(&mut normal, &mut rhs, unknowns)?;

    let mut global = ComplexMatrix::zeros(dim);
    let mut col = 0;
    for k in 0..dim {
        global.set(k, k, Complex64::new(coeffs[col], 0.0));
        col += 1;
    }
    for j in 0..dim {
        for k in (j + 1)..dim {
            let z = Complex64::new(coeffs[col], coeffs[col + 1]);
            global.set(j, k, z);
            global.set(k, j, z.conj());
            col += 2;
        }
    }

    // PD projection.
    let eig = spectra::eig_hermitian(&global)?;
    let floor = 1e-14 * eig.max().abs().max(1.0);
    let mut clamp: f64 = 0.0;
    for &lam in &eig.values {
        if lam < floor {
            clamp = clamp.max(floor - lam);
        }
    }
    let (global, perturbed) = if clamp > 0.0 {
        (eig.map_rebuild(|lam| lam.max(floor)), true)
    } else {
        (global, false)
    };

    let local = factor_product(&global, n, d);
    Ok(Reconstruction {
        global,
        local,
        perturbed,
        clamp_magnitude: clamp,
    })
}

fn product_amplitudes(x: &ProductState, dim: usize, d: usize) -> Vec<Complex64> {
    let n = x.n();
    let mut amps = Vec::with_capacity(dim);
    for idx in 0..dim {
        let mut rest = idx;
        let mut digits = vec![0usize; n];
        for slot in (0..n).rev() {
            digits[slot] = rest % d;
            rest /= d;
        }
        let mut z = Complex64::new(1.0, 0.0);
        for (party, &digit) in digits.iter().enumerate() {
            z *= x.factor(party)[digit];
        }
        amps.push(z);
    }
    amps
}

/// Gaussian elimination with partial pivoting on the normal equations.
fn solve_linear(a: &mut [f64], b: &mut [f64], k: usize) -> Result<Vec<f64>, MultiError> {
    let scale = a.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1.0);
    for col in 0..k {
        let mut pivot = col;
        for r in (col + 1)..k {
            if a[r * k + col].abs() > a[pivot * k + col].abs() {
                pivot = r;
            }
        }
        if a[pivot * k + col].abs() < 1e-10 * scale {
            return Err(MultiError::RankDeficientFrame);
        }
        if pivot != col {
            for c in 0..k {
                a.swap(col * k + c, pivot * k + c);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * k + col];
        for r in (col + 1)..k {
            let f = a[r * k + col] * inv;
            if f == 0.0 {
                continue;
            }
            for c in col..k {
                a[r * k + c] -= f * a[col * k + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0f64; k];
    for col in (0..k).rev() {
        let mut acc = b[col];
        for c in (col + 1)..k {
            acc -= a[col * k + c] * x[c];
        }
        x[col] = acc / a[col * k + col];
    }
    Ok(x)
}

/// Attempts to factor a global operator into per-party factors via partial
/// traces; returns None when it is not a tensor product within tolerance.
fn factor_product(global: &ComplexMatrix, n: usize, d: usize) -> Option<LocalPSDOperator> {
    let total_trace = global.trace().re;
    if total_trace <= 0.0 {
        return None;
    }
    let mut locals = Vec::with_capacity(n);
    for party in 0..n {
        let reduced = partial_trace_keep(global, n, d, party);
        locals.push(reduced);
    }
    // If X = ⊗G_i then Tr_{≠i}X = G_i · (TrX / TrG_i); rescaling each reduced
    // factor to trace T^{1/n} reproduces X exactly.
    let t_root = total_trace.powf(1.0 / n as f64);
    let mut product = ComplexMatrix::identity(1);
    let mut factors = Vec::with_capacity(n);
    for reduced in &locals {
        let tr = reduced.trace().re;
        if tr <= 0.0 {
            return None;
        }
        let scaled = reduced.scale(t_root / tr);
        product = product.kron(&scaled);
        factors.push(scaled);
    }
    let scale = global.max_abs_entry().max(1.0);
    if product.max_abs_diff(global) > 1e-6 * scale {
        return None;
    }
    let parties: Result<Vec<HermitianPD>, _> =
        factors.into_iter().map(HermitianPD::new).collect();
    LocalPSDOperator::new(parties.ok()?).ok()
}

fn partial_trace_keep(global: &ComplexMatrix, n: usize, d: usize, party: usize) -> ComplexMatrix {
    let stride = d.pow((n - 1 - party) as u32);
    let dim = global.dim();
    let mut out = ComplexMatrix::zeros(d);
    for a in 0..d {
        for b in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            // iterate over the joint index of all other parties
            for rest in 0..(dim / d) {
                let low = rest % stride;
                let high = rest / stride;
                let row = high * stride * d + a * stride + low;
                let col = high * stride * d + b * stride + low;
                acc += global.get(row, col);
            }
            out.set(a, b, acc);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Optimal paths.
// ---------------------------------------------------------------------------

/// Pointwise optimality defect λ_max[G(t)⁻¹G′(t)] of a multipartite path,
/// evaluated in the gauge where the path is re-referenced to its own initial
/// operator and normalized to λ_max[G(t)] = 1.
///
/// The defect reduces to a sum of per-party terms
/// λ_max(Ĝ_i^{-1/2} Ĝ_i′ Ĝ_i^{-1/2}); it vanishes for every t iff the path is
/// optimal.
pub fn path_optimality_defect(path: &PathSpec, t: f64) -> Result<f64, MultiError> {
    let mp = match path {
        PathSpec::Multipartite(mp) => mp,
        PathSpec::Bipartite(_) => return Err(MultiError::WrongFamily),
    };
    if !(0.0..=1.0).contains(&t) {
        return Err(MultiError::BadDescriptor(format!("t = {t} outside [0,1]")));
    }
    let joint_eps = 1e-9;
    for joint in mp.interior_joints() {
        if (t - joint).abs() <= joint_eps {
            return Err(MultiError::NonDifferentiablePoint { t });
        }
    }

    let start = mp.ops_at(0.0)?;
    let here = mp.ops_at(t)?;
    let deriv = match mp.ops_deriv_at(t) {
        Some(d) => d?,
        None => finite_difference_deriv(mp, t)?,
    };

    let mut defect = 0.0;
    for i in 0..here.len() {
        let w = start[i].inv_sqrt();
        let a_mat = w.mul(here[i].matrix()).mul(&w).symmetrized();
        let a = HermitianPD::new(a_mat)?;
        let a_prime = w.mul(&deriv[i]).mul(&w).symmetrized();

        let s = a.inv_sqrt();
        let k = s.mul(&a_prime).mul(&s).symmetrized();
        let lam_k = spectra::eig_hermitian(&k)?.max();

        // d/dt log λ_max(A): Hellmann-Feynman on the top eigenspace.
        let eig_a = a.eig();
        let lam = eig_a.max();
        let dim = a.dim();
        let top: Vec<usize> = (0..dim)
            .filter(|&j| eig_a.values[j] >= lam * (1.0 - 1e-9))
            .collect();
        let rho = if top.len() == 1 {
            let v: Vec<Complex64> = (0..dim).map(|r| eig_a.vectors.get(r, top[0])).collect();
            a_prime.quadratic_form(&v).re / lam
        } else {
            // degenerate top eigenvalue: directional derivative is the largest
            // eigenvalue of the compression onto the top eigenspace
            let m = top.len();
            let mut comp = ComplexMatrix::zeros(m);
            for (r, &jr) in top.iter().enumerate() {
                let vr: Vec<Complex64> = (0..dim).map(|q| eig_a.vectors.get(q, jr)).collect();
                let avr = a_prime.apply(&vr);
                for (c, &jc) in top.iter().enumerate() {
                    let vc: Vec<Complex64> = (0..dim).map(|q| eig_a.vectors.get(q, jc)).collect();
                    let entry: Complex64 =
                        vc.iter().zip(avr.iter()).map(|(x, y)| x.conj() * y).sum();
                    comp.set(c, r, entry);
                }
            }
            spectra::eig_hermitian(&comp.symmetrized())?.max() / lam
        };
        defect += lam_k - rho;
    }
    Ok(defect.max(0.0))
}

/// Central differences with one Richardson level, step 1e-5 (shrunk near the
/// ends of the surrounding segment).
fn finite_difference_deriv(
    mp: &MultipartitePath,
    t: f64,
) -> Result<Vec<ComplexMatrix>, MultiError> {
    let (lo, hi) = mp.segment_bounds(t);
    let h = 1e-5f64.min((t - lo).max(1e-12) / 2.0).min((hi - t).max(1e-12) / 2.0);
    if h < 1e-10 {
        return Err(MultiError::NonDifferentiablePoint { t });
    }
    let stencil = |step: f64| -> Result<Vec<ComplexMatrix>, MultiError> {
        let plus = mp.ops_at(t + step)?;
        let minus = mp.ops_at(t - step)?;
        Ok(plus
            .iter()
            .zip(minus.iter())
            .map(|(p, m)| p.matrix().sub(m.matrix()).scale(1.0 / (2.0 * step)))
            .collect())
    };
    let d1 = stencil(h)?;
    let d2 = stencil(h / 2.0)?;
    Ok(d1
        .iter()
        .zip(d2.iter())
        .map(|(a, b)| b.scale(4.0 / 3.0).sub(&a.scale(1.0 / 3.0)))
        .collect())
}

/// Optimal path G(t) = ⊗ U^{(i)} diag[r_k^{(i)}(t)] U^{(i)}† with nonincreasing
/// eigenvalue schedules from the identity to the target operator.
pub fn make_diag_interp_path(
    target: &GenericStateDescriptor,
    form: &ScheduleForm,
) -> Result<PathSpec, MultiError> {
    let op = target.op().normalized_per_party();
    let mut parties = Vec::with_capacity(op.n());
    for i in 0..op.n() {
        let eig = op.party(i).eig();
        // descending targets, leading entry 1
        let mut targets: Vec<f64> = eig.values.iter().rev().copied().collect();
        let dim = targets.len();
        let mut unitary = ComplexMatrix::zeros(dim);
        for (new_col, old_col) in (0..dim).rev().enumerate() {
            for row in 0..dim {
                unitary.set(row, new_col, eig.vectors.get(row, old_col));
            }
        }
        if let Some(first) = targets.first_mut() {
            *first = 1.0;
        }
        form.validate(&targets)?;
        parties.push(crate::path::DiagInterpParty {
            unitary,
            targets,
            form: form.clone(),
        });
    }
    Ok(PathSpec::Multipartite(MultipartitePath::new(
        target.n(),
        target.d(),
        target.seed().to_vec(),
        target.generic_asserted,
        MultiPathKind::DiagInterp { parties },
    )))
}

/// Twofold-optimal path changing the parties one at a time:
/// during stage i the eigenvalues of G_i follow λ_k^{(i)}(t) = (λ_k^{(i)})^{nt-i+1}.
pub fn make_sequential_twofold_path(
    target: &GenericStateDescriptor,
) -> Result<PathSpec, MultiError> {
    let op = target.op();
    let mut parties = Vec::with_capacity(op.n());
    for i in 0..op.n() {
        let eig = op.party(i).eig();
        let dim = eig.values.len();
        let mut unitary = ComplexMatrix::zeros(dim);
        let mut log_eigs = Vec::with_capacity(dim);
        for (new_col, old_col) in (0..dim).rev().enumerate() {
            for row in 0..dim {
                unitary.set(row, new_col, eig.vectors.get(row, old_col));
            }
            log_eigs.push(eig.values[old_col].ln());
        }
        parties.push(crate::path::SeqParty { unitary, log_eigs });
    }
    Ok(PathSpec::Multipartite(MultipartitePath::new(
        target.n(),
        target.d(),
        target.seed().to_vec(),
        target.generic_asserted,
        MultiPathKind::SequentialTwofold { parties },
    )))
}
