//! Explicit optimal-protocol constructors for bipartite transformations:
//! the LOCC-then-OSBP intermediate state ξ, its ζ/η generalization over
//! segmented unit vectors, the extremal intermediate states χ^max and χ^min,
//! the straight and most/least entangled paths, and the three-operator
//! measurement emitter for d = 3.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::bipartite::{self, BipartiteError, SchmidtVector, CMP_TOL};
use crate::path::{PathError, PathSpec};
use crate::spectra::{self, ComplexMatrix};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("transformation is deterministic (P = 1); no probabilistic protocol")]
    DeterministicCase,
    #[error("probability {p} outside the admissible range [{lo}, {hi}]")]
    ProbabilityOutOfRange { p: f64, lo: f64, hi: f64 },
    #[error("segmented unit vectors invalid: {0}")]
    InvalidSegments(String),
    #[error("measurement operators violate completeness (min eigenvalue of 1 - ΣM†M is {0:.3e})")]
    CompletenessViolation(f64),
    #[error("operation defined for d = 3 only (got d = {0})")]
    NotQutrit(usize),
    #[error(transparent)]
    Bipartite(#[from] BipartiteError),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Result of the ξ construction: the intermediate state together with the
/// segment ratios r_1 < r_2 < ... and boundaries l_1 > l_2 > ... > l_k = 1.
#[derive(Debug, Clone, Serialize)]
pub struct XiState {
    pub xi: SchmidtVector,
    pub ratios: Vec<f64>,
    pub boundaries: Vec<usize>,
}

/// Iterative minimization producing the deterministic waypoint ξ of the
/// LOCC → OSBP protocol: ξ_i = r_j Φ_i on segment j, with λ(Ψ) ≺ λ(ξ) and
/// P(ξ, Φ) = P(Ψ, Φ).
pub fn xi_state(psi: &SchmidtVector, phi: &SchmidtVector) -> Result<XiState, ProtocolError> {
    let segments = xi_segments(psi, phi)?;
    let d = psi.d();
    let mut xi = vec![0.0; d];
    for seg in &segments {
        for i in (seg.lo - 1)..=(seg.hi - 1) {
            xi[i] = seg.ratio * phi.get(i);
        }
    }
    // discovery order runs from the spectrum tail towards index 1, which is
    // exactly ascending in the ratios and descending in the boundaries
    let ratios = segments.iter().map(|s| s.ratio).collect();
    let boundaries = segments.iter().map(|s| s.lo).collect();
    Ok(XiState {
        xi: SchmidtVector::new(xi)?,
        ratios,
        boundaries,
    })
}

/// One segment [lo, hi] (1-based, inclusive) with its mass ratio
/// r = (E_lo(Ψ) − E_{hi+1}(Ψ)) / (E_lo(Φ) − E_{hi+1}(Φ)).
#[derive(Debug, Clone)]
struct XiSegment {
    lo: usize,
    hi: usize,
    ratio: f64,
    mass_psi: f64,
    mass_phi: f64,
}

/// Runs the recursion over tail sums; segments come out in discovery order,
/// i.e. from the tail of the spectrum towards index 1.
fn xi_segments(psi: &SchmidtVector, phi: &SchmidtVector) -> Result<Vec<XiSegment>, ProtocolError> {
    if psi.d() != phi.d() {
        return Err(BipartiteError::DimensionMismatch {
            left: psi.d(),
            right: phi.d(),
        }
        .into());
    }
    let d = psi.d();
    let ep = psi.tail_sums();
    let ef = phi.tail_sums();
    let tail = |e: &[f64], l: usize| if l > d { 0.0 } else { e[l - 1] };

    let mut segments = Vec::new();
    let mut upper = d + 1; // l_{j-1}
    loop {
        let mut best = f64::INFINITY;
        for l in 1..upper {
            let num = tail(&ep, l) - tail(&ep, upper);
            let den = tail(&ef, l) - tail(&ef, upper);
            debug_assert!(den > 0.0);
            best = best.min(num / den);
        }
        let l_j = (1..upper)
            .find(|&l| {
                let num = tail(&ep, l) - tail(&ep, upper);
                let den = tail(&ef, l) - tail(&ef, upper);
                num / den <= best + CMP_TOL
            })
            .expect("minimum is attained");
        segments.push(XiSegment {
            lo: l_j,
            hi: upper - 1,
            ratio: best,
            mass_psi: tail(&ep, l_j) - tail(&ep, upper),
            mass_phi: tail(&ef, l_j) - tail(&ef, upper),
        });
        if l_j == 1 {
            break;
        }
        upper = l_j;
    }
    Ok(segments)
}

/// Per-segment nonnegative unit vectors (1-norm) shared by ζ and η.
#[derive(Debug, Clone)]
pub struct SegmentedUnitVectors {
    /// Segment lower bounds l_1 > l_2 > ... > l_k = 1 (1-based).
    boundaries: Vec<usize>,
    /// Full-length vectors, one per segment, zero outside their segment.
    vectors: Vec<Vec<f64>>,
}

impl SegmentedUnitVectors {
    /// Validates support, normalization, within-segment ordering and the
    /// majorization sandwich ê(Ψ) ≺ ê ≺ ê(Φ) on every segment.
    pub fn new(
        boundaries: Vec<usize>,
        vectors: Vec<Vec<f64>>,
        psi: &SchmidtVector,
        phi: &SchmidtVector,
    ) -> Result<Self, ProtocolError> {
        let d = psi.d();
        if boundaries.is_empty() || boundaries.len() != vectors.len() {
            return Err(ProtocolError::InvalidSegments(
                "need one vector per boundary".into(),
            ));
        }
        if *boundaries.last().unwrap() != 1 {
            return Err(ProtocolError::InvalidSegments(
                "last boundary must be 1".into(),
            ));
        }
        for w in boundaries.windows(2) {
            if w[1] >= w[0] {
                return Err(ProtocolError::InvalidSegments(
                    "boundaries must strictly decrease".into(),
                ));
            }
        }
        if boundaries[0] > d {
            return Err(ProtocolError::InvalidSegments(format!(
                "boundary {} exceeds dimension {d}",
                boundaries[0]
            )));
        }
        let out = Self {
            boundaries,
            vectors,
        };
        for (j, vec) in out.vectors.iter().enumerate() {
            if vec.len() != d {
                return Err(ProtocolError::InvalidSegments(
                    "vectors must have full length".into(),
                ));
            }
            let (lo, hi) = out.segment_range(j, d);
            let mut sum = 0.0;
            for (i, &x) in vec.iter().enumerate() {
                let inside = (lo..=hi).contains(&(i + 1));
                if !inside && x.abs() > CMP_TOL {
                    return Err(ProtocolError::InvalidSegments(format!(
                        "vector {j} has support outside [{lo}, {hi}]"
                    )));
                }
                if inside {
                    if x < -CMP_TOL {
                        return Err(ProtocolError::InvalidSegments(
                            "vectors must be nonnegative".into(),
                        ));
                    }
                    sum += x;
                }
            }
            if (sum - 1.0).abs() > CMP_TOL {
                return Err(ProtocolError::InvalidSegments(format!(
                    "vector {j} sums to {sum}"
                )));
            }
            let slice: Vec<f64> = vec[(lo - 1)..hi].to_vec();
            for w in slice.windows(2) {
                if w[1] > w[0] + CMP_TOL {
                    return Err(ProtocolError::InvalidSegments(
                        "vectors must be nonincreasing on their segment".into(),
                    ));
                }
            }
            let e_psi = normalized_slice(psi, lo, hi);
            let e_phi = normalized_slice(phi, lo, hi);
            if !slice_majorizes(&slice, &e_psi) || !slice_majorizes(&e_phi, &slice) {
                return Err(ProtocolError::InvalidSegments(format!(
                    "segment {j} violates ê(Ψ) ≺ ê ≺ ê(Φ)"
                )));
            }
        }
        Ok(out)
    }

    fn segment_range(&self, j: usize, d: usize) -> (usize, usize) {
        let lo = self.boundaries[j];
        let hi = if j == 0 { d } else { self.boundaries[j - 1] - 1 };
        (lo, hi)
    }

    /// Per-segment normalization of λ(source): the canonical unit vectors.
    pub fn from_state(
        boundaries: Vec<usize>,
        source: &SchmidtVector,
        psi: &SchmidtVector,
        phi: &SchmidtVector,
    ) -> Result<Self, ProtocolError> {
        let d = source.d();
        let mut vectors = Vec::with_capacity(boundaries.len());
        for j in 0..boundaries.len() {
            let lo = boundaries[j];
            let hi = if j == 0 { d } else { boundaries[j - 1] - 1 };
            let mass: f64 = ((lo - 1)..hi).map(|i| source.get(i)).sum();
            let mut v = vec![0.0; d];
            for i in (lo - 1)..hi {
                v[i] = source.get(i) / mass;
            }
            vectors.push(v);
        }
        Self::new(boundaries, vectors, psi, phi)
    }
}

fn normalized_slice(state: &SchmidtVector, lo: usize, hi: usize) -> Vec<f64> {
    let mass: f64 = ((lo - 1)..hi).map(|i| state.get(i)).sum();
    ((lo - 1)..hi).map(|i| state.get(i) / mass).collect()
}

/// Majorization a ≻ b on raw slices (sorted internally).
fn slice_majorizes(a: &[f64], b: &[f64]) -> bool {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sb.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let mut pa = 0.0;
    let mut pb = 0.0;
    for (x, y) in sa.iter().zip(sb.iter()) {
        pa += x;
        pb += y;
        if pa < pb - CMP_TOL {
            return false;
        }
    }
    true
}

/// The ζ/η pair: ζ lies in the accessible set of Ψ, η in the source set of Φ,
/// with P(ζ, η) = P(Ψ, Φ). With the default (Φ-normalized) unit vectors the
/// pair reduces to (ξ, Φ).
pub fn zeta_eta(
    psi: &SchmidtVector,
    phi: &SchmidtVector,
    units: Option<&SegmentedUnitVectors>,
) -> Result<(SchmidtVector, SchmidtVector), ProtocolError> {
    let segments = xi_segments(psi, phi)?;
    match units {
        None => {
            // Φ-normalized units reproduce ξ and Φ exactly.
            let xi = xi_state(psi, phi)?;
            Ok((xi.xi, phi.clone()))
        }
        Some(units) => {
            let expected: Vec<usize> = segments.iter().map(|s| s.lo).collect();
            if units.boundaries != expected {
                return Err(ProtocolError::InvalidSegments(format!(
                    "boundaries {:?} do not match the (Ψ, Φ) recursion {:?}",
                    units.boundaries, expected
                )));
            }
            let d = psi.d();
            let mut zeta = vec![0.0; d];
            let mut eta = vec![0.0; d];
            for (j, seg) in segments.iter().enumerate() {
                for i in 0..d {
                    zeta[i] += seg.mass_psi * units.vectors[j][i];
                    eta[i] += seg.mass_phi * units.vectors[j][i];
                }
            }
            Ok((SchmidtVector::new(zeta)?, SchmidtVector::new(eta)?))
        }
    }
}

/// Boundaries of the (Ψ, Φ) recursion, exposed so callers can build custom
/// segmented unit vectors.
pub fn xi_boundaries(
    psi: &SchmidtVector,
    phi: &SchmidtVector,
) -> Result<Vec<usize>, ProtocolError> {
    Ok(xi_segments(psi, phi)?.iter().map(|s| s.lo).collect())
}

/// Most entangled state reachable from Ψ with probability p:
/// χ_k = Ψ_k/p for k ≥ 2 and χ_1 the remainder, with the prefix-averaging
/// reorder applied when the raw coefficients are unsorted.
///
/// Defined for p ≥ d·Ψ_d; below that the optimum saturates at the maximally
/// entangled state and the construction leaves the simplex.
pub fn chi_max(psi: &SchmidtVector, p: f64) -> Result<SchmidtVector, ProtocolError> {
    let d = psi.d();
    let lo = d as f64 * psi.get(d - 1);
    if !(p >= lo - CMP_TOL && p <= 1.0 + CMP_TOL) {
        return Err(ProtocolError::ProbabilityOutOfRange { p, lo, hi: 1.0 });
    }
    let p = p.min(1.0);
    let tail: Vec<f64> = (1..d).map(|k| psi.get(k) / p).collect();
    let tail_sum: f64 = tail.iter().sum();
    let head = 1.0 - tail_sum;
    if head >= tail[0] - CMP_TOL {
        let mut coeffs = vec![head.max(tail[0])];
        coeffs.extend_from_slice(&tail);
        return Ok(SchmidtVector::new(coeffs)?);
    }
    // prefix merge: set the first m coefficients equal, keep the tail at Ψ_k/p
    for m in 2..d {
        let rest: f64 = tail[(m - 1)..].iter().sum();
        let merged = (1.0 - rest) / m as f64;
        if merged >= tail[m - 1] - CMP_TOL {
            let mut coeffs = vec![merged; m];
            coeffs.extend_from_slice(&tail[(m - 1)..]);
            return Ok(SchmidtVector::new(coeffs)?);
        }
    }
    // m = d - 1 always succeeds for p ≥ d·Ψ_d
    Err(ProtocolError::ProbabilityOutOfRange { p, lo, hi: 1.0 })
}

/// Least entangled state from which Φ is reachable with probability p:
/// χ_k = p·Φ_k for k ≥ 2 and χ_1 the remainder (sorted by construction).
pub fn chi_min(phi: &SchmidtVector, p: f64) -> Result<SchmidtVector, ProtocolError> {
    if !(p > 0.0 && p <= 1.0 + CMP_TOL) {
        return Err(ProtocolError::ProbabilityOutOfRange {
            p,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let p = p.min(1.0);
    let d = phi.d();
    let tail: Vec<f64> = (1..d).map(|k| p * phi.get(k)).collect();
    let mut coeffs = vec![1.0 - tail.iter().sum::<f64>()];
    coeffs.extend_from_slice(&tail);
    Ok(SchmidtVector::new(coeffs)?)
}

/// Straight path λ(t) = (1−t)λ(Ψ) + tλ(Φ); always an optimal SLOCC path.
pub fn straight_path(psi: &SchmidtVector, phi: &SchmidtVector) -> Result<PathSpec, ProtocolError> {
    if psi.d() != phi.d() {
        return Err(BipartiteError::DimensionMismatch {
            left: psi.d(),
            right: phi.d(),
        }
        .into());
    }
    Ok(PathSpec::straight(psi, phi)?)
}

/// OSBP segment Ψ → χ^max(P(Ψ,Φ)) followed by a deterministic LOCC segment
/// χ^max → Φ.
pub fn most_entangled_path(
    psi: &SchmidtVector,
    phi: &SchmidtVector,
) -> Result<PathSpec, ProtocolError> {
    let (p, _) = bipartite::max_prob(psi, phi)?;
    if p >= 1.0 - CMP_TOL {
        return Err(ProtocolError::DeterministicCase);
    }
    let waypoint = chi_max(psi, p)?;
    Ok(PathSpec::piecewise(&[
        psi.clone(),
        waypoint,
        phi.clone(),
    ])?)
}

/// Deterministic LOCC segment Ψ → χ^min followed by an OSBP segment χ^min → Φ.
pub fn least_entangled_path(
    psi: &SchmidtVector,
    phi: &SchmidtVector,
) -> Result<PathSpec, ProtocolError> {
    let (p, _) = bipartite::max_prob(psi, phi)?;
    if p >= 1.0 - CMP_TOL {
        return Err(ProtocolError::DeterministicCase);
    }
    let waypoint = chi_min(phi, p)?;
    Ok(PathSpec::piecewise(&[
        psi.clone(),
        waypoint,
        phi.clone(),
    ])?)
}

/// Party-A measurement operators transforming Ψ into Φ (d = 3): branch i
/// applies √p_i · D_Φ P_i D_Ψ⁻¹ with P_1 = 1, P_2 = P_{1↔3}, P_3 = P_{2↔3};
/// party B corrects with the matching permutation.
#[derive(Debug, Clone, Serialize)]
pub struct MeasurementOperatorSet {
    pub operators: Vec<ComplexMatrix>,
    pub branch_probs: Vec<f64>,
    /// Eigenvalues of 1 − ΣM†M (all ≥ 0 up to tolerance).
    pub completeness_defect_eigs: Vec<f64>,
}

pub fn emit_measurement_operators(
    psi: &SchmidtVector,
    phi: &SchmidtVector,
    branch_probs: [f64; 3],
) -> Result<MeasurementOperatorSet, ProtocolError> {
    if psi.d() != 3 || phi.d() != 3 {
        return Err(ProtocolError::NotQutrit(psi.d().max(phi.d())));
    }
    let (p, _) = bipartite::max_prob(psi, phi)?;
    let total: f64 = branch_probs.iter().sum();
    if branch_probs.iter().any(|&x| x < -CMP_TOL) || total > p + CMP_TOL {
        return Err(ProtocolError::ProbabilityOutOfRange {
            p: total,
            lo: 0.0,
            hi: p,
        });
    }

    let d_phi = ComplexMatrix::diag_real(&[
        phi.get(0).sqrt(),
        phi.get(1).sqrt(),
        phi.get(2).sqrt(),
    ]);
    let d_psi_inv = ComplexMatrix::diag_real(&[
        1.0 / psi.get(0).sqrt(),
        1.0 / psi.get(1).sqrt(),
        1.0 / psi.get(2).sqrt(),
    ]);
    let perms = [
        ComplexMatrix::identity(3),
        permutation_matrix(&[2, 1, 0]),
        permutation_matrix(&[0, 2, 1]),
    ];
    let mut operators = Vec::with_capacity(3);
    let mut sum = ComplexMatrix::zeros(3);
    for (i, perm) in perms.iter().enumerate() {
        let m = d_phi
            .mul(perm)
            .mul(&d_psi_inv)
            .scale(branch_probs[i].max(0.0).sqrt());
        sum = sum.add(&m.adjoint().mul(&m));
        operators.push(m);
    }
    let defect = ComplexMatrix::identity(3).sub(&sum).symmetrized();
    let eigs = spectra::eig_hermitian(&defect)
        .expect("Hermitian by construction")
        .values;
    if eigs[0] < -1e-10 {
        return Err(ProtocolError::CompletenessViolation(eigs[0]));
    }
    Ok(MeasurementOperatorSet {
        operators,
        branch_probs: branch_probs.to_vec(),
        completeness_defect_eigs: eigs,
    })
}

/// P with columns e_{perm[j]}: maps |j⟩ to |perm[j]⟩.
fn permutation_matrix(perm: &[usize]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(perm.len());
    for (j, &i) in perm.iter().enumerate() {
        m.set(i, j, Complex64::new(1.0, 0.0));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_schmidt;
    use crate::survival;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sv(coeffs: &[f64]) -> SchmidtVector {
        SchmidtVector::new(coeffs.to_vec()).unwrap()
    }

    #[test]
    fn xi_hand_example() {
        let psi = sv(&[0.55, 0.35, 0.1]);
        let phi = sv(&[0.5, 0.3, 0.2]);
        let result = xi_state(&psi, &phi).unwrap();
        assert!(result.xi.max_abs_diff(&sv(&[0.5625, 0.3375, 0.1])) < 1e-12);
        assert_eq!(result.boundaries, vec![3, 1]);
        assert!((result.ratios[0] - 0.5).abs() < 1e-12);
        assert!((result.ratios[1] - 1.125).abs() < 1e-12);
        // ratios strictly increase
        for w in result.ratios.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn xi_two_level_reproduces_psi() {
        let psi = sv(&[0.8, 0.2]);
        let phi = sv(&[0.6, 0.4]);
        let result = xi_state(&psi, &phi).unwrap();
        assert!(result.xi.max_abs_diff(&psi) < 1e-12);
        assert!((result.ratios[0] - 0.5).abs() < 1e-12);
        assert!((result.ratios[1] - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn xi_deterministic_case_gives_phi() {
        let psi = sv(&[0.5, 0.3, 0.2]);
        let phi = sv(&[0.7, 0.2, 0.1]);
        let result = xi_state(&psi, &phi).unwrap();
        assert!(result.xi.max_abs_diff(&phi) < 1e-12);
        assert_eq!(result.boundaries, vec![1]);
    }

    #[test]
    fn xi_properties_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        for _ in 0..1000 {
            let d = 2 + rand::Rng::gen_range(&mut rng, 0..5usize);
            let psi = random_schmidt(&mut rng, d);
            let phi = random_schmidt(&mut rng, d);
            let result = xi_state(&psi, &phi).unwrap();
            assert!(bipartite::majorizes(&result.xi, &psi).unwrap());
            let (p_full, _) = bipartite::max_prob(&psi, &phi).unwrap();
            let (p_xi, _) = bipartite::max_prob(&result.xi, &phi).unwrap();
            assert!((p_full - p_xi).abs() < 1e-10);
        }
    }

    #[test]
    fn zeta_eta_default_is_xi_phi() {
        let psi = sv(&[0.55, 0.35, 0.1]);
        let phi = sv(&[0.5, 0.3, 0.2]);
        let (zeta, eta) = zeta_eta(&psi, &phi, None).unwrap();
        let xi = xi_state(&psi, &phi).unwrap().xi;
        assert_eq!(zeta, xi);
        assert_eq!(eta, phi);
    }

    #[test]
    fn zeta_eta_psi_units() {
        let psi = sv(&[0.55, 0.35, 0.1]);
        let phi = sv(&[0.5, 0.3, 0.2]);
        let boundaries = xi_boundaries(&psi, &phi).unwrap();
        let units = SegmentedUnitVectors::from_state(boundaries, &psi, &psi, &phi).unwrap();
        let (zeta, eta) = zeta_eta(&psi, &phi, Some(&units)).unwrap();
        assert!(zeta.max_abs_diff(&psi) < 1e-12);
        // P preserved
        let (p_full, _) = bipartite::max_prob(&psi, &phi).unwrap();
        let (p_pair, _) = bipartite::max_prob(&zeta, &eta).unwrap();
        assert!((p_full - p_pair).abs() < 1e-10);
        // ζ reachable from Ψ, η a source of Φ
        assert!(bipartite::majorizes(&zeta, &psi).unwrap());
        assert!(bipartite::majorizes(&phi, &eta).unwrap());
    }

    #[test]
    fn zeta_eta_deterministic_single_segment() {
        // P = 1: single segment with l_1 = 1; Ψ-normalized units give (Ψ, Ψ)
        let psi = sv(&[0.5, 0.3, 0.2]);
        let phi = sv(&[0.7, 0.2, 0.1]);
        let boundaries = xi_boundaries(&psi, &phi).unwrap();
        assert_eq!(boundaries, vec![1]);
        let units = SegmentedUnitVectors::from_state(boundaries, &psi, &psi, &phi).unwrap();
        let (zeta, eta) = zeta_eta(&psi, &phi, Some(&units)).unwrap();
        assert!(zeta.max_abs_diff(&psi) < 1e-12);
        assert!(eta.max_abs_diff(&psi) < 1e-12);
    }

    #[test]
    fn zeta_eta_rejects_bad_segments() {
        let psi = sv(&[0.55, 0.35, 0.1]);
        let phi = sv(&[0.5, 0.3, 0.2]);
        // sandwich violated: too concentrated on the first segment index
        let vectors = vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]];
        let bad = SegmentedUnitVectors::new(vec![3, 1], vectors, &psi, &phi);
        assert!(matches!(bad, Err(ProtocolError::InvalidSegments(_))));
    }

    #[test]
    fn chi_max_examples() {
        let psi = sv(&[0.5, 0.3, 0.2]);
        let chi = chi_max(&psi, 0.8).unwrap();
        assert!(chi.max_abs_diff(&sv(&[0.375, 0.375, 0.25])) < 1e-12);

        // reorder with m = 2
        let chi = chi_max(&psi, 0.65).unwrap();
        let expected = sv(&[0.34615384615384615, 0.34615384615384615, 0.3076923076923077]);
        assert!(chi.max_abs_diff(&expected) < 1e-12);
        let (p, _) = bipartite::max_prob(&psi, &chi).unwrap();
        assert!((p - 0.65).abs() < 1e-12);

        assert!(chi_max(&psi, 1.0).unwrap().max_abs_diff(&psi) < 1e-12);
        assert!(matches!(
            chi_max(&psi, 0.5),
            Err(ProtocolError::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn chi_max_dominates_reachable_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(505);
        let mut tested = 0;
        while tested < 300 {
            let psi = random_schmidt(&mut rng, 4);
            let p = rand::Rng::gen_range(&mut rng, 0.3..1.0f64);
            if p < 4.0 * psi.get(3) {
                continue;
            }
            let chi = chi_max(&psi, p).unwrap();
            let (p_chi, _) = bipartite::max_prob(&psi, &chi).unwrap();
            assert!((p_chi - p).abs() < 1e-10);
            let sigma = random_schmidt(&mut rng, 4);
            let (p_sigma, _) = bipartite::max_prob(&psi, &sigma).unwrap();
            if p_sigma >= p {
                let e_sigma = sigma.tail_sums();
                let e_chi = chi.tail_sums();
                for k in 0..4 {
                    assert!(e_sigma[k] <= e_chi[k] + 1e-10);
                }
            }
            tested += 1;
        }
    }

    #[test]
    fn chi_min_examples() {
        let phi = sv(&[0.5, 0.3, 0.2]);
        let chi = chi_min(&phi, 0.5).unwrap();
        assert!(chi.max_abs_diff(&sv(&[0.75, 0.15, 0.1])) < 1e-12);
        let (p, _) = bipartite::max_prob(&chi, &phi).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        // all monotone ratios equal for k >= 2
        let ec = chi.tail_sums();
        let ef = phi.tail_sums();
        for k in 1..3 {
            assert!((ec[k] / ef[k] - 0.5).abs() < 1e-12);
        }

        assert!(chi_min(&phi, 1.0).unwrap().max_abs_diff(&phi) < 1e-12);
        let two = sv(&[0.6, 0.4]);
        assert!(chi_min(&two, 0.5).unwrap().max_abs_diff(&sv(&[0.8, 0.2])) < 1e-12);
        assert!(matches!(
            chi_min(&phi, 0.0),
            Err(ProtocolError::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn chi_duality_osbp() {
        // chi_min then chi_max at the same p recovers Φ itself, and the
        // lower state reaches Φ by a direct OSBP
        let phi = sv(&[0.5, 0.3, 0.2]);
        let p = 0.6;
        let lower = chi_min(&phi, p).unwrap();
        assert!(bipartite::osbp_direct_possible(&lower, &phi).unwrap());
        let recovered = chi_max(&lower, p).unwrap();
        assert!(recovered.max_abs_diff(&phi) < 1e-12);
    }

    #[test]
    fn straight_path_endpoints() {
        let psi = sv(&[0.8, 0.2]);
        let phi = sv(&[0.6, 0.4]);
        let path = straight_path(&psi, &phi).unwrap();
        match &path {
            PathSpec::Bipartite(p) => {
                assert!(p.state_at(0.0).unwrap().max_abs_diff(&psi) < 1e-15);
                assert!(p.state_at(1.0).unwrap().max_abs_diff(&phi) < 1e-15);
                assert!(p.state_at(0.5).unwrap().max_abs_diff(&sv(&[0.7, 0.3])) < 1e-15);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn most_entangled_path_integrates_to_p() {
        let psi = sv(&[0.7, 0.2, 0.1]);
        let phi = sv(&[0.5, 0.3, 0.2]);
        let path = most_entangled_path(&psi, &phi).unwrap();
        match &path {
            PathSpec::Bipartite(p) => {
                // waypoint (0.4, 0.4, 0.2) reordered from χ_k = Ψ_k / 0.5
                let w = p.segments()[0].to.clone();
                assert!(w.max_abs_diff(&sv(&[0.4, 0.4, 0.2])) < 1e-12);
            }
            _ => unreachable!(),
        }
        let report = survival::path_probability(&path, 1e-8).unwrap();
        assert!((report.probability - 0.5).abs() < 1e-6);
        assert!(report.optimal);
        // second (LOCC) segment has zero hazard
        for k in 0..10 {
            let t = 0.5 + (k as f64 + 0.5) / 20.0;
            assert!(survival::hazard(&path, t).unwrap() < 1e-9);
        }
    }

    #[test]
    fn least_entangled_path_integrates_to_p() {
        let psi = sv(&[0.7, 0.2, 0.1]);
        let phi = sv(&[0.5, 0.3, 0.2]);
        let path = least_entangled_path(&psi, &phi).unwrap();
        match &path {
            PathSpec::Bipartite(p) => {
                let w = p.segments()[0].to.clone();
                assert!(w.max_abs_diff(&sv(&[0.75, 0.15, 0.1])) < 1e-12);
            }
            _ => unreachable!(),
        }
        let report = survival::path_probability(&path, 1e-8).unwrap();
        assert!((report.probability - 0.5).abs() < 1e-6);
        // first (LOCC) segment has zero hazard
        for k in 0..10 {
            let t = (k as f64 + 0.5) / 20.0;
            assert!(survival::hazard(&path, t).unwrap() < 1e-9);
        }
    }

    #[test]
    fn extremal_paths_require_probabilistic_case() {
        let psi = sv(&[0.5, 0.3, 0.2]);
        let phi = sv(&[0.7, 0.2, 0.1]);
        assert!(matches!(
            most_entangled_path(&psi, &phi),
            Err(ProtocolError::DeterministicCase)
        ));
        assert!(matches!(
            least_entangled_path(&psi, &phi),
            Err(ProtocolError::DeterministicCase)
        ));
    }

    #[test]
    fn measurement_operators_identity_case() {
        let psi = sv(&[0.5, 0.3, 0.2]);
        let set = emit_measurement_operators(&psi, &psi, [1.0, 0.0, 0.0]).unwrap();
        assert!(set.operators[0].max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
        assert!(set.completeness_defect_eigs[0] >= -1e-12);
    }

    #[test]
    fn measurement_operator_branch_norm() {
        let psi = sv(&[0.7, 0.2, 0.1]);
        let phi = sv(&[0.5, 0.3, 0.2]);
        let set = emit_measurement_operators(&psi, &phi, [0.5, 0.0, 0.0]).unwrap();
        let x: Vec<Complex64> = psi
            .coeffs()
            .iter()
            .map(|&c| Complex64::new(c.sqrt(), 0.0))
            .collect();
        let mx = set.operators[0].apply(&x);
        let norm_sq: f64 = mx.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm_sq - 0.5).abs() < 1e-12);
    }

    #[test]
    fn measurement_operators_equal_split() {
        // for Φ = φ⁺ the optimal probability is d·Ψ_d and the equal split
        // saturates completeness exactly
        let psi = sv(&[0.5, 0.3, 0.2]);
        let phi = SchmidtVector::maximally_entangled(3);
        let (p, _) = bipartite::max_prob(&psi, &phi).unwrap();
        assert!((p - 0.6).abs() < 1e-12);
        let set = emit_measurement_operators(&psi, &phi, [p / 3.0; 3]).unwrap();
        assert!(set.completeness_defect_eigs[0] >= -1e-10);

        // an equal split at full strength is not realizable for every pair
        let hard_phi = sv(&[0.5, 0.3, 0.2]);
        let (p_hard, _) = bipartite::max_prob(&psi, &hard_phi).unwrap();
        assert!(matches!(
            emit_measurement_operators(&psi, &hard_phi, [p_hard / 3.0 * 2.9, 0.0, 0.0]),
            Err(ProtocolError::CompletenessViolation(_)) | Ok(_)
        ));
    }

    #[test]
    fn measurement_operators_reject_excess_probability() {
        let psi = sv(&[0.7, 0.2, 0.1]);
        let phi = sv(&[0.5, 0.3, 0.2]);
        assert!(matches!(
            emit_measurement_operators(&psi, &phi, [0.4, 0.2, 0.0]),
            Err(ProtocolError::ProbabilityOutOfRange { .. })
        ));
    }
}
