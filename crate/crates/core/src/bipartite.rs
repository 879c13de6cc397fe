//! Bipartite core: Schmidt vectors, the tail-sum monotones E_l, majorization,
//! optimal conversion probabilities, and the majorization lattice.
//!
//! A state is always handled through its sorted Schmidt vector, the canonical
//! representative of its LU class. Deterministic LOCC convertibility is the
//! majorization order; the optimal probability is the minimal ratio of the
//! E_l monotones.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance on sums, partial sums and ratio comparisons.
pub const CMP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BipartiteError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("monotone index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("degenerate input: zero Schmidt tail where full entanglement is required")]
    DegenerateInput,
    #[error("coefficients must sum to 1 (got {sum})")]
    NotNormalized { sum: f64 },
    #[error("coefficients must be nonnegative and finite")]
    InvalidCoefficient,
}

/// Sorted probability vector of Schmidt coefficients.
///
/// The constructor sorts descending; callers may pass the coefficients in any
/// order. Fully entangled states (strictly positive smallest coefficient) are
/// enforced unless the degenerate constructor is used for failure branches.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtVector {
    lambda: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SchmidtVectorWire {
    d: usize,
    lambda: Vec<f64>,
}

impl Serialize for SchmidtVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SchmidtVectorWire {
            d: self.d(),
            lambda: self.lambda.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SchmidtVector {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = SchmidtVectorWire::deserialize(de)?;
        if wire.d != wire.lambda.len() {
            return Err(D::Error::custom(format!(
                "declared dimension {} does not match {} coefficients",
                wire.d,
                wire.lambda.len()
            )));
        }
        SchmidtVector::new(wire.lambda).map_err(D::Error::custom)
    }
}

impl SchmidtVector {
    /// Fully entangled state from coefficients in any order.
    pub fn new(coeffs: Vec<f64>) -> Result<Self, BipartiteError> {
        let sv = Self::new_allow_degenerate(coeffs)?;
        if sv.lambda[sv.d() - 1] <= 0.0 {
            return Err(BipartiteError::DegenerateInput);
        }
        Ok(sv)
    }

    /// Constructor admitting zero tails, for protocol failure branches.
    pub fn new_allow_degenerate(mut coeffs: Vec<f64>) -> Result<Self, BipartiteError> {
        if coeffs.is_empty() || coeffs.iter().any(|x| !x.is_finite() || *x < -CMP_TOL) {
            return Err(BipartiteError::InvalidCoefficient);
        }
        let sum: f64 = coeffs.iter().sum();
        if (sum - 1.0).abs() > CMP_TOL {
            return Err(BipartiteError::NotNormalized { sum });
        }
        coeffs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(Self { lambda: coeffs })
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.lambda.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.lambda
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.lambda[i]
    }

    pub fn is_fully_entangled(&self) -> bool {
        self.lambda[self.d() - 1] > 0.0
    }

    /// Maximally entangled vector (1/d, ..., 1/d): the lattice bottom element.
    pub fn maximally_entangled(d: usize) -> Self {
        Self {
            lambda: vec![1.0 / d as f64; d],
        }
    }

    /// Prefix partial sums S_k = Σ_{i<k} λ_i, k = 1..d (S_d is forced to 1).
    pub fn partial_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.d());
        for &x in &self.lambda {
            acc += x;
            out.push(acc);
        }
        out[self.d() - 1] = 1.0;
        out
    }

    /// Tail sums E_l = Σ_{i=l}^d λ_i for l = 1..d (E_1 is forced to 1).
    /// Accumulated from the smallest coefficients for stability.
    pub fn tail_sums(&self) -> Vec<f64> {
        let d = self.d();
        let mut out = vec![0.0; d];
        let mut acc = 0.0;
        for l in (0..d).rev() {
            acc += self.lambda[l];
            out[l] = acc;
        }
        out[0] = 1.0;
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.lambda
            .iter()
            .zip(other.lambda.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn check_dim(&self, other: &Self) -> Result<(), BipartiteError> {
        if self.d() != other.d() {
            return Err(BipartiteError::DimensionMismatch {
                left: self.d(),
                right: other.d(),
            });
        }
        Ok(())
    }
}

/// Entanglement monotone E_l(Ψ) = Σ_{i=l}^d Ψ_i, 1-based l.
pub fn monotone_e(psi: &SchmidtVector, l: usize) -> Result<f64, BipartiteError> {
    if l == 0 || l > psi.d() {
        return Err(BipartiteError::IndexOutOfRange {
            index: l,
            dim: psi.d(),
        });
    }
    Ok(psi.tail_sums()[l - 1])
}

/// True iff λ(b) ≺ λ(a): every partial sum of `a` dominates that of `b`.
pub fn majorizes(a: &SchmidtVector, b: &SchmidtVector) -> Result<bool, BipartiteError> {
    a.check_dim(b)?;
    let sa = a.partial_sums();
    let sb = b.partial_sums();
    Ok(sa.iter().zip(sb.iter()).all(|(x, y)| *x >= *y - CMP_TOL))
}

/// Deterministic LOCC feasibility source → target (Nielsen's criterion).
pub fn locc_possible(source: &SchmidtVector, target: &SchmidtVector) -> Result<bool, BipartiteError> {
    majorizes(target, source)
}

/// Optimal conversion probability P(Ψ, Φ) = min_l E_l(Ψ)/E_l(Φ), together
/// with the smallest minimizing index (ties resolved within 1e-12).
pub fn max_prob(psi: &SchmidtVector, phi: &SchmidtVector) -> Result<(f64, usize), BipartiteError> {
    psi.check_dim(phi)?;
    if !psi.is_fully_entangled() || !phi.is_fully_entangled() {
        return Err(BipartiteError::DegenerateInput);
    }
    let ep = psi.tail_sums();
    let ef = phi.tail_sums();
    let mut p = f64::INFINITY;
    for l in 0..psi.d() {
        if ef[l] <= 0.0 {
            return Err(BipartiteError::DegenerateInput);
        }
        p = p.min(ep[l] / ef[l]);
    }
    let argmin = (0..psi.d())
        .find(|&l| ep[l] / ef[l] <= p + CMP_TOL)
        .unwrap();
    Ok((p, argmin + 1))
}

/// Unique infimum of the majorization lattice: component-wise minimum of the
/// partial sums. The minimum of two concave sum profiles is concave, so the
/// induced coefficients are already sorted.
pub fn lattice_meet(a: &SchmidtVector, b: &SchmidtVector) -> Result<SchmidtVector, BipartiteError> {
    a.check_dim(b)?;
    let sa = a.partial_sums();
    let sb = b.partial_sums();
    let s: Vec<f64> = sa.iter().zip(sb.iter()).map(|(x, y)| x.min(*y)).collect();
    Ok(from_partial_sums(&s))
}

/// Unique supremum: the least concave majorant of the component-wise maximum
/// of the partial sums, obtained by pooling adjacent violators (flattening).
pub fn lattice_join(a: &SchmidtVector, b: &SchmidtVector) -> Result<SchmidtVector, BipartiteError> {
    a.check_dim(b)?;
    let sa = a.partial_sums();
    let sb = b.partial_sums();
    let s: Vec<f64> = sa.iter().zip(sb.iter()).map(|(x, y)| x.max(*y)).collect();
    let mut v = diffs(&s);
    flatten_nonincreasing(&mut v);
    SchmidtVector::new_allow_degenerate(v)
}

fn diffs(s: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(s.len());
    let mut prev = 0.0;
    for &x in s {
        v.push((x - prev).max(0.0));
        prev = x;
    }
    v
}

fn from_partial_sums(s: &[f64]) -> SchmidtVector {
    SchmidtVector {
        lambda: diffs(s),
    }
}

/// Pool-adjacent-violators pass enforcing a nonincreasing coefficient vector;
/// block sums (and with them the dominated partial sums) are preserved, which
/// yields exactly the least upper bound.
fn flatten_nonincreasing(v: &mut Vec<f64>) {
    // (block sum, block length)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(v.len());
    for &x in v.iter() {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let n = blocks.len();
            let (s_prev, l_prev) = blocks[n - 2];
            let (s_last, l_last) = blocks[n - 1];
            if s_prev / l_prev as f64 >= s_last / l_last as f64 {
                break;
            }
            blocks.truncate(n - 2);
            blocks.push((s_prev + s_last, l_prev + l_last));
        }
    }
    v.clear();
    for (sum, len) in blocks {
        let avg = sum / len as f64;
        v.extend(std::iter::repeat_n(avg, len));
    }
}

/// Membership in the lattice interval [Ψ, Φ] = {χ : λ(Ψ) ≺ λ(χ) ≺ λ(Φ)}.
/// A member is a deterministic optimal intermediate state.
pub fn in_interval(
    chi: &SchmidtVector,
    psi: &SchmidtVector,
    phi: &SchmidtVector,
) -> Result<bool, BipartiteError> {
    Ok(majorizes(chi, psi)? && majorizes(phi, chi)?)
}

/// Outcome of the optimal-intermediate-state check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntermediateCheck {
    pub verdict: bool,
    /// Smallest minimizing monotone index of P(Ψ, Φ).
    pub l: usize,
    /// True when χ coincides (as a sorted vector) with an endpoint, which is
    /// excluded from the intermediate-state set.
    pub trivial_endpoint: bool,
}

/// Checks whether χ is an optimal intermediate state of the transformation
/// Ψ → Φ, i.e. P(Ψ,χ)·P(χ,Φ) = P(Ψ,Φ) and χ is not an endpoint.
pub fn is_intermediate(
    psi: &SchmidtVector,
    chi: &SchmidtVector,
    phi: &SchmidtVector,
) -> Result<IntermediateCheck, BipartiteError> {
    psi.check_dim(chi)?;
    psi.check_dim(phi)?;
    let (p_total, l) = max_prob(psi, phi)?;
    if chi.max_abs_diff(psi) <= CMP_TOL || chi.max_abs_diff(phi) <= CMP_TOL {
        return Ok(IntermediateCheck {
            verdict: false,
            l,
            trivial_endpoint: true,
        });
    }
    let (p1, _) = max_prob(psi, chi)?;
    let (p2, _) = max_prob(chi, phi)?;
    Ok(IntermediateCheck {
        verdict: (p1 * p2 - p_total).abs() <= 1e-10,
        l,
        trivial_endpoint: false,
    })
}

/// True iff Ψ can be optimally transformed into Φ by a single direct OSBP:
/// the coefficient ratio Ψ_l/Φ_l is minimized at l = d and the optimal
/// probability equals Ψ_d/Φ_d and is strictly below one.
pub fn osbp_direct_possible(
    psi: &SchmidtVector,
    phi: &SchmidtVector,
) -> Result<bool, BipartiteError> {
    psi.check_dim(phi)?;
    if !psi.is_fully_entangled() || !phi.is_fully_entangled() {
        return Err(BipartiteError::DegenerateInput);
    }
    let d = psi.d();
    let tail_ratio = psi.get(d - 1) / phi.get(d - 1);
    let ratios_ok = (0..d).all(|l| tail_ratio <= psi.get(l) / phi.get(l) + CMP_TOL);
    let (p, _) = max_prob(psi, phi)?;
    Ok(ratios_ok && (p - tail_ratio).abs() <= CMP_TOL && p < 1.0 - CMP_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_schmidt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sv(coeffs: &[f64]) -> SchmidtVector {
        SchmidtVector::new(coeffs.to_vec()).unwrap()
    }

    #[test]
    fn constructor_sorts_and_validates() {
        let v = SchmidtVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(v.coeffs(), &[0.5, 0.3, 0.2]);
        assert!(SchmidtVector::new(vec![0.6, 0.3]).is_err());
        assert!(SchmidtVector::new(vec![0.7, 0.3, 0.0]).is_err());
        assert!(SchmidtVector::new_allow_degenerate(vec![0.7, 0.3, 0.0]).is_ok());
    }

    #[test]
    fn monotone_tail_sums() {
        let v = sv(&[0.5, 0.3, 0.2]);
        assert!((monotone_e(&v, 2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(monotone_e(&v, 1).unwrap(), 1.0);
        let m = sv(&[1.0 / 3.0; 3]);
        assert!((monotone_e(&m, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            monotone_e(&v, 4),
            Err(BipartiteError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            monotone_e(&v, 0),
            Err(BipartiteError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn majorization_examples() {
        let a = sv(&[0.6, 0.3, 0.1]);
        let b = sv(&[0.5, 0.4, 0.1]);
        assert!(majorizes(&a, &b).unwrap());
        assert!(majorizes(&a, &a).unwrap());
        let c = sv(&[0.6, 0.2, 0.2]);
        assert!(!majorizes(&c, &b).unwrap());
        assert!(!majorizes(&b, &c).unwrap());
        assert!(locc_possible(&b, &a).unwrap());
    }

    #[test]
    fn max_prob_paper_values() {
        // §V.B.e numbers
        let phi = sv(&[0.6, 0.3, 0.1]);
        let chi = sv(&[0.5, 0.4, 0.1]);
        let fours = max_prob(&phi, &chi).unwrap();
        assert!((fours.0 - 0.8).abs() < 1e-12);
        assert_eq!(fours.1, 2);

        let plus = SchmidtVector::maximally_entangled(3);
        let (p, _) = max_prob(&chi, &plus).unwrap();
        assert!((p - 0.3).abs() < 1e-12);

        let x = sv(&[0.2, 0.3, 0.5]);
        let (p, l) = max_prob(&x, &x).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(l, 1);
    }

    #[test]
    fn max_prob_dimension_mismatch() {
        let a = sv(&[0.6, 0.4]);
        let b = sv(&[0.5, 0.4, 0.1]);
        assert!(matches!(
            max_prob(&a, &b),
            Err(BipartiteError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn meet_examples() {
        let a = sv(&[0.6, 0.2, 0.2]);
        let b = sv(&[0.5, 0.4, 0.1]);
        let m = lattice_meet(&a, &b).unwrap();
        assert!(m.max_abs_diff(&sv(&[0.5, 0.3, 0.2])) < 1e-12);
        assert!(lattice_meet(&a, &a).unwrap().max_abs_diff(&a) < 1e-12);
        let bottom = SchmidtVector::maximally_entangled(3);
        assert!(lattice_meet(&bottom, &b).unwrap().max_abs_diff(&bottom) < 1e-12);
    }

    #[test]
    fn join_examples() {
        let a = sv(&[0.6, 0.2, 0.2]);
        let b = sv(&[0.5, 0.4, 0.1]);
        let j = lattice_join(&a, &b).unwrap();
        assert!(j.max_abs_diff(&sv(&[0.6, 0.3, 0.1])) < 1e-12);
        assert!(lattice_join(&b, &b).unwrap().max_abs_diff(&b) < 1e-12);

        // max partial sums (0.55, 0.85, 1.0) are already concave here
        let a = sv(&[0.55, 0.25, 0.2]);
        let b = sv(&[0.5, 0.35, 0.15]);
        let j = lattice_join(&a, &b).unwrap();
        assert!(j.max_abs_diff(&sv(&[0.55, 0.3, 0.15])) < 1e-12);
    }

    #[test]
    fn join_flattening_pools_violators() {
        // max partial sums (0.6, 0.75, 0.95, 1.0) induce (0.6, 0.15, 0.2, 0.05);
        // pooling gives (0.6, 0.175, 0.175, 0.05).
        let a = sv(&[0.6, 0.15, 0.15, 0.1]);
        let b = sv(&[0.5, 0.25, 0.2, 0.05]);
        let j = lattice_join(&a, &b).unwrap();
        assert!(j.max_abs_diff(&sv(&[0.6, 0.175, 0.175, 0.05])) < 1e-12);
        assert!(majorizes(&j, &a).unwrap());
        assert!(majorizes(&j, &b).unwrap());
    }

    #[test]
    fn interval_examples() {
        let psi = sv(&[0.5, 0.4, 0.1]);
        let phi = sv(&[0.6, 0.3, 0.1]);
        assert!(in_interval(&psi, &psi, &phi).unwrap());
        let chi = sv(&[0.55, 0.35, 0.1]);
        assert!(in_interval(&chi, &psi, &phi).unwrap());
        let bad = sv(&[0.4, 0.4, 0.2]);
        assert!(!in_interval(&bad, &psi, &phi).unwrap());
    }

    #[test]
    fn intermediate_hand_example() {
        let psi = sv(&[0.7, 0.2, 0.1]);
        let chi = sv(&[0.6, 0.25, 0.15]);
        let phi = sv(&[0.5, 0.3, 0.2]);
        let check = is_intermediate(&psi, &chi, &phi).unwrap();
        assert!(check.verdict);
        assert_eq!(check.l, 3);

        let trivial = is_intermediate(&psi, &psi, &phi).unwrap();
        assert!(!trivial.verdict);
        assert!(trivial.trivial_endpoint);

        // the maximally entangled state overshoots: product < P(Ψ,Φ)
        let plus = SchmidtVector::maximally_entangled(3);
        let check = is_intermediate(&psi, &plus, &phi).unwrap();
        assert!(!check.verdict);
        assert!(!check.trivial_endpoint);
    }

    #[test]
    fn osbp_examples() {
        assert!(osbp_direct_possible(&sv(&[0.7, 0.2, 0.1]), &sv(&[0.5, 0.3, 0.2])).unwrap());
        assert!(!osbp_direct_possible(&sv(&[0.8, 0.1, 0.1]), &sv(&[0.5, 0.4, 0.1])).unwrap());
        // deterministic case excluded by the strict inequality
        assert!(!osbp_direct_possible(&sv(&[0.5, 0.3, 0.2]), &sv(&[0.7, 0.2, 0.1])).unwrap());
    }

    #[test]
    fn prob_one_iff_majorized() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..2000 {
            let d = 2 + (rand::Rng::gen_range(&mut rng, 0..5usize));
            let a = random_schmidt(&mut rng, d);
            let b = random_schmidt(&mut rng, d);
            let (p, _) = max_prob(&a, &b).unwrap();
            let det = locc_possible(&a, &b).unwrap();
            assert_eq!(p >= 1.0 - CMP_TOL, det, "a={:?} b={:?}", a, b);
            if det {
                assert!((p - 1.0).abs() <= CMP_TOL);
            }
        }
    }

    #[test]
    fn multiplicativity_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        for _ in 0..2000 {
            let d = 3;
            let a = random_schmidt(&mut rng, d);
            let b = random_schmidt(&mut rng, d);
            let c = random_schmidt(&mut rng, d);
            let (pab, _) = max_prob(&a, &b).unwrap();
            let (pac, _) = max_prob(&a, &c).unwrap();
            let (pcb, _) = max_prob(&c, &b).unwrap();
            assert!(pab >= pac * pcb - 1e-12);
            let check = is_intermediate(&a, &c, &b).unwrap();
            if !check.trivial_endpoint {
                assert_eq!(check.verdict, (pac * pcb - pab).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn interval_membership_implies_intermediate() {
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        let mut found = 0;
        while found < 300 {
            let a = random_schmidt(&mut rng, 4);
            let b = random_schmidt(&mut rng, 4);
            if !majorizes(&b, &a).unwrap() {
                continue;
            }
            let c = lattice_join(&a, &lattice_meet(&b, &random_schmidt(&mut rng, 4)).unwrap()).unwrap();
            if in_interval(&c, &a, &b).unwrap() {
                let check = is_intermediate(&a, &c, &b).unwrap();
                assert!(check.verdict || check.trivial_endpoint);
                found += 1;
            }
        }
    }

    #[test]
    fn schmidt_json_round_trip() {
        let v = sv(&[0.5, 0.3, 0.2]);
        let json = serde_json::to_string(&v).unwrap();
        let back: SchmidtVector = serde_json::from_str(&json).unwrap();
        assert_eq!(v, back);
        // declared d must match
        assert!(serde_json::from_str::<SchmidtVector>(r#"{"d":2,"lambda":[0.5,0.3,0.2]}"#).is_err());
    }
}
