//! The nongeneric 4-qubit family ψ(γ⃗) with G(γ⃗) = ½·1 + Σ γ_k σ_k acting on
//! one party: LOCC feasibility through the four ratio inequalities,
//! accessible-region probing and the no-intermediate-state witness search.
//!
//! The witness construction is existence-only in closed form, so the
//! extremizers are found by exhaustive grid search with local refinement and
//! certified point-by-point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Feasibility slack tolerance.
const SLACK_TOL: f64 = 1e-12;
/// Strict-norm margin inside the open ball ‖γ‖ < 1/2.
const NORM_MARGIN: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourQubitError {
    #[error("characterization requires all six components nonzero")]
    NotApplicable,
    #[error("gamma vector violates its invariants: {0}")]
    InvariantViolation(String),
    #[error("no feasible grid points found (grid too coarse?)")]
    EmptyRegion,
    #[error("grid resolution {0} outside [1e-4, 1e-1]")]
    BadResolution(f64),
    #[error("extremizer sits on the search-domain boundary; refine the grid")]
    ResolutionTooCoarse,
}

/// Vector γ⃗ = (γ₁, γ₂, γ₃) with γ₁, γ₂ ≥ 0 and ‖γ⃗‖ < 1/2, labelling the LU
/// class of ψ(γ⃗).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GammaVector {
    gamma: [f64; 3],
}

impl GammaVector {
    pub fn new(gamma: [f64; 3]) -> Result<Self, FourQubitError> {
        if gamma.iter().any(|x| !x.is_finite()) {
            return Err(FourQubitError::InvariantViolation("non-finite".into()));
        }
        if gamma[0] < 0.0 || gamma[1] < 0.0 {
            return Err(FourQubitError::InvariantViolation(
                "first two components must be nonnegative".into(),
            ));
        }
        let v = Self { gamma };
        if v.norm() >= 0.5 {
            return Err(FourQubitError::InvariantViolation(format!(
                "norm {} must be < 1/2",
                v.norm()
            )));
        }
        Ok(v)
    }

    pub fn components(&self) -> [f64; 3] {
        self.gamma
    }

    pub fn norm(&self) -> f64 {
        self.gamma.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn all_nonzero(&self) -> bool {
        self.gamma.iter().all(|&x| x != 0.0)
    }

    fn dist(&self, other: &Self) -> f64 {
        self.gamma
            .iter()
            .zip(other.gamma.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Feasibility record: the component ratios r_i = γ_i/ξ_i and the four
/// inequality slacks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub r: [f64; 3],
    pub slack: [f64; 4],
}

/// LOCC feasibility src → dst for all-nonzero vectors: the four inequalities
/// 1 ± r₁ ± r₂ ± r₃ ≥ 0 with an even number of minus signs on {r₁,r₂,r₃}.
pub fn locc_feasible(src: &GammaVector, dst: &GammaVector) -> Result<Feasibility, FourQubitError> {
    if !src.all_nonzero() || !dst.all_nonzero() {
        return Err(FourQubitError::NotApplicable);
    }
    let r = [
        src.gamma[0] / dst.gamma[0],
        src.gamma[1] / dst.gamma[1],
        src.gamma[2] / dst.gamma[2],
    ];
    let slack = slacks(r);
    Ok(Feasibility {
        feasible: slack.iter().all(|&s| s >= -SLACK_TOL),
        r,
        slack,
    })
}

#[inline]
fn slacks(r: [f64; 3]) -> [f64; 4] {
    [
        1.0 + r[0] + r[1] + r[2],
        1.0 + r[0] - r[1] - r[2],
        1.0 + r[1] - r[0] - r[2],
        1.0 + r[2] - r[0] - r[1],
    ]
}

#[inline]
fn feasible_fast(src: [f64; 3], dst: [f64; 3]) -> bool {
    let r = [src[0] / dst[0], src[1] / dst[1], src[2] / dst[2]];
    slacks(r).iter().all(|&s| s >= -SLACK_TOL)
}

/// Entanglement measure ½ − ‖γ⃗‖; LOCC can only decrease it.
pub fn norm_measure(g: &GammaVector) -> f64 {
    0.5 - g.norm()
}

/// Accessible region of `src` on a grid of resolution ρ, split by the sign of
/// the third component. The trivial point src itself is excluded.
#[derive(Debug, Clone)]
pub struct Regions {
    pub k_plus: Vec<GammaVector>,
    pub k_minus: Vec<GammaVector>,
    pub resolution: f64,
    /// Euclidean gap between the two components.
    pub min_gap: f64,
}

pub fn accessible_region(src: &GammaVector, grid: f64) -> Result<Regions, FourQubitError> {
    if !(1e-4..=1e-1).contains(&grid) {
        return Err(FourQubitError::BadResolution(grid));
    }
    if !src.all_nonzero() {
        return Err(FourQubitError::NotApplicable);
    }
    let s = src.components();
    let mut k_plus = Vec::new();
    let mut k_minus = Vec::new();
    let steps = (0.5 / grid).ceil() as i64;
    for i in 1..=steps {
        let g1 = i as f64 * grid;
        if g1 >= 0.5 {
            break;
        }
        for j in 1..=steps {
            let g2 = j as f64 * grid;
            let sq12 = g1 * g1 + g2 * g2;
            if sq12 >= 0.25 {
                break;
            }
            for k in 1..=steps {
                let g3 = k as f64 * grid;
                if sq12 + g3 * g3 >= (0.5 - NORM_MARGIN) * (0.5 - NORM_MARGIN) {
                    break;
                }
                let plus = [g1, g2, g3];
                if feasible_fast(s, plus) && plus != s {
                    k_plus.push(GammaVector { gamma: plus });
                }
                let minus = [g1, g2, -g3];
                if feasible_fast(s, minus) && minus != s {
                    k_minus.push(GammaVector { gamma: minus });
                }
            }
        }
    }
    if k_plus.is_empty() && k_minus.is_empty() {
        return Err(FourQubitError::EmptyRegion);
    }
    let min_gap = region_gap(&k_plus, &k_minus);
    Ok(Regions {
        k_plus,
        k_minus,
        resolution: grid,
        min_gap,
    })
}

/// Minimum Euclidean distance between the two components, pruned by the fact
/// that any pair is at least |γ₃⁺| + |γ₃⁻| apart in the third coordinate.
fn region_gap(k_plus: &[GammaVector], k_minus: &[GammaVector]) -> f64 {
    if k_plus.is_empty() || k_minus.is_empty() {
        return f64::INFINITY;
    }
    let mut plus: Vec<&GammaVector> = k_plus.iter().collect();
    let mut minus: Vec<&GammaVector> = k_minus.iter().collect();
    plus.sort_by(|a, b| a.gamma[2].partial_cmp(&b.gamma[2]).unwrap());
    minus.sort_by(|a, b| b.gamma[2].partial_cmp(&a.gamma[2]).unwrap());
    let mut best = f64::INFINITY;
    for p in &plus {
        if p.gamma[2] + minus[0].gamma[2].abs() >= best {
            break;
        }
        for m in &minus {
            if p.gamma[2] + m.gamma[2].abs() >= best {
                break;
            }
            best = best.min(p.dist(m));
        }
    }
    best
}

/// One certificate line: every competing grid candidate must fail a
/// feasibility test.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessCertificate {
    /// ξ₊ → ξ₋ is LOCC feasible.
    pub pair_feasible: bool,
    /// Grid candidates examined (K ∪ K₋ minus the extremizers).
    pub candidates_checked: usize,
    /// Candidates that survived a test they must fail (must be 0).
    pub violations: usize,
    /// LOCC = SEP holds for these classes, so the emptiness extends to
    /// separable operations.
    pub sep_equals_locc_note: &'static str,
}

/// The no-intermediate-state witness: a feasible pair (ξ₊, ξ₋) whose
/// deterministic transformation admits no optimal intermediate state, up to
/// the stated grid resolution.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub xi_plus: GammaVector,
    pub xi_minus: GammaVector,
    pub resolution: f64,
    pub certificate: WitnessCertificate,
}

/// Searches the accessible region of `alpha` for the witness pair:
/// ξ₋ minimizes the norm over the component of opposite γ₃ sign, ξ₊ maximizes
/// the norm over K = K_s(ξ₋) ∩ K₊ (with the trivial source point admitted to
/// the pool, since the source-set boundary is tangent to the accessible cone
/// there). Every remaining grid candidate is then eliminated by a direct
/// feasibility check, certifying an empty intermediate set at this resolution.
pub fn no_intermediate_witness(alpha: &GammaVector, grid: f64) -> Result<Witness, FourQubitError> {
    let regions = accessible_region(alpha, grid)?;
    let s = alpha.components();
    // "K₋" is the component on the opposite side of the γ₃ = 0 plane from α;
    // "K₊" the same-sign component (matches the written construction for
    // α₃ > 0 and mirrors it for α₃ < 0).
    let (same, opposite) = if s[2] > 0.0 {
        (&regions.k_plus, &regions.k_minus)
    } else {
        (&regions.k_minus, &regions.k_plus)
    };
    if same.is_empty() || opposite.is_empty() {
        return Err(FourQubitError::EmptyRegion);
    }

    // ξ₋ = argmin ‖·‖ over the opposite-sign component (lexicographic
    // tie-break), refined by local bisection.
    let xi_minus_grid = *opposite
        .iter()
        .min_by(|a, b| {
            (a.norm(), a.gamma[0], a.gamma[1], a.gamma[2])
                .partial_cmp(&(b.norm(), b.gamma[0], b.gamma[1], b.gamma[2]))
                .unwrap()
        })
        .unwrap();
    check_interior(&xi_minus_grid, grid)?;
    let opp_sign = -s[2].signum();
    let xi_minus = refine(
        xi_minus_grid,
        grid,
        false,
        &|v| v.gamma[2] * opp_sign > 0.0 && feasible_fast(s, v.gamma),
    );
    let xm = xi_minus.components();

    // ξ₊ = argmax ‖·‖ over K = K_s(ξ₋) ∩ (K₊ ∪ {α}).
    let mut pool: Vec<GammaVector> = same
        .iter()
        .filter(|b| feasible_fast(b.gamma, xm))
        .copied()
        .collect();
    pool.push(*alpha);
    let xi_plus_grid = *pool
        .iter()
        .max_by(|a, b| {
            (a.norm(), -a.gamma[0], -a.gamma[1], -a.gamma[2])
                .partial_cmp(&(b.norm(), -b.gamma[0], -b.gamma[1], -b.gamma[2]))
                .unwrap()
        })
        .unwrap();
    let xi_plus = refine(
        xi_plus_grid,
        grid,
        true,
        &|v| {
            v.gamma[2] * opp_sign < 0.0
                && feasible_fast(s, v.gamma)
                && feasible_fast(v.gamma, xm)
        },
    );

    let pair = locc_feasible(&xi_plus, &xi_minus)?;

    // Certificate: a candidate intermediate of ξ₊ → ξ₋ would have to be
    // reachable from ξ₊ and a source of ξ₋. Same-sign candidates must fail
    // the source test (norm argument: ξ₊ is norm-maximal among sources in
    // K₊); opposite-sign candidates must fail to reach ξ₋ (ξ₋ is
    // norm-minimal). Both are checked directly on every grid point.
    let mut checked = 0usize;
    let mut violations = 0usize;
    for beta in same {
        if beta.dist(&xi_plus) <= 1e-12 {
            continue;
        }
        checked += 1;
        if feasible_fast(beta.gamma, xm) && feasible_fast(xi_plus.components(), beta.gamma) {
            violations += 1;
        }
    }
    for beta in opposite {
        if beta.dist(&xi_minus) <= 1e-12 {
            continue;
        }
        checked += 1;
        if feasible_fast(beta.gamma, xm) {
            violations += 1;
        }
    }

    Ok(Witness {
        xi_plus,
        xi_minus,
        resolution: grid,
        certificate: WitnessCertificate {
            pair_feasible: pair.feasible,
            candidates_checked: checked,
            violations,
            sep_equals_locc_note:
                "SEP = LOCC for these SLOCC classes; the intermediate set is empty for separable operations as well",
        },
    })
}

/// Extremizers must not touch the search-box boundary (the ball constraint is
/// intrinsic and exempt).
fn check_interior(v: &GammaVector, grid: f64) -> Result<(), FourQubitError> {
    if v.gamma[0] < grid * 0.5 || v.gamma[1] < grid * 0.5 || v.gamma[2].abs() < grid * 0.5 {
        return Err(FourQubitError::ResolutionTooCoarse);
    }
    Ok(())
}

/// Local bisection refinement: repeatedly halves the cell around the current
/// extremizer, keeping only feasible candidates.
fn refine(
    start: GammaVector,
    grid: f64,
    maximize: bool,
    admissible: &dyn Fn(&GammaVector) -> bool,
) -> GammaVector {
    let mut best = start;
    let mut step = grid / 2.0;
    for _ in 0..3 {
        let mut improved = true;
        while improved {
            improved = false;
            let b = best.gamma;
            for dx in -1..=1i32 {
                for dy in -1..=1i32 {
                    for dz in -1..=1i32 {
                        if dx == 0 && dy == 0 && dz == 0 {
                            continue;
                        }
                        let cand = [
                            b[0] + dx as f64 * step,
                            b[1] + dy as f64 * step,
                            b[2] + dz as f64 * step,
                        ];
                        let norm_sq: f64 = cand.iter().map(|x| x * x).sum();
                        if cand[0] <= 0.0
                            || cand[1] <= 0.0
                            || cand[2] == 0.0
                            || norm_sq >= (0.5 - NORM_MARGIN) * (0.5 - NORM_MARGIN)
                        {
                            continue;
                        }
                        let cand = GammaVector { gamma: cand };
                        if !admissible(&cand) {
                            continue;
                        }
                        let better = if maximize {
                            cand.norm() > best.norm() + 1e-15
                        } else {
                            cand.norm() < best.norm() - 1e-15
                        };
                        if better {
                            best = cand;
                            improved = true;
                        }
                    }
                }
            }
        }
        step /= 2.0;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gv(a: f64, b: f64, c: f64) -> GammaVector {
        GammaVector::new([a, b, c]).unwrap()
    }

    #[test]
    fn invariants_enforced() {
        assert!(GammaVector::new([-0.1, 0.1, 0.1]).is_err());
        assert!(GammaVector::new([0.4, 0.3, 0.1]).is_err()); // norm >= 1/2
        assert!(GammaVector::new([0.09, 0.1, -0.08]).is_ok());
    }

    #[test]
    fn identity_is_feasible() {
        let a = gv(0.09, 0.1, 0.08);
        let f = locc_feasible(&a, &a).unwrap();
        assert!(f.feasible);
        assert_eq!(f.r, [1.0, 1.0, 1.0]);
        assert!((f.slack[0] - 4.0).abs() < 1e-15);
        for &s in &f.slack[1..] {
            assert!(s.abs() < 1e-15);
        }
    }

    #[test]
    fn sign_flip_is_infeasible() {
        let src = gv(0.09, 0.1, 0.08);
        let dst = gv(0.09, 0.1, -0.08);
        let f = locc_feasible(&src, &dst).unwrap();
        assert!(!f.feasible);
        assert!((f.slack[3] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_component_rejected() {
        let src = gv(0.09, 0.1, 0.08);
        let dst = GammaVector::new([0.09, 0.0, 0.08]).unwrap();
        assert!(matches!(
            locc_feasible(&src, &dst),
            Err(FourQubitError::NotApplicable)
        ));
    }

    #[test]
    fn norm_measure_values() {
        assert!((norm_measure(&GammaVector::new([0.0, 0.0, 0.0]).unwrap()) - 0.5).abs() < 1e-15);
        let v = gv(0.09, 0.1, 0.08);
        assert!((norm_measure(&v) - (0.5 - 0.0245f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn feasibility_implies_norm_growth() {
        let src = gv(0.09, 0.1, 0.08);
        let regions = accessible_region(&src, 0.02).unwrap();
        for beta in regions.k_plus.iter().chain(regions.k_minus.iter()) {
            assert!(src.norm() <= beta.norm() + 1e-12, "{beta:?}");
        }
    }

    #[test]
    fn equal_norm_pairs_mutually_infeasible() {
        // Observation 4 on sampled equal-norm pairs
        let mut rng = crate::sampling::rng_from_seed(42);
        let mut tested = 0;
        while tested < 1000 {
            let g1: f64 = rand::Rng::gen_range(&mut rng, 0.01..0.3);
            let g2: f64 = rand::Rng::gen_range(&mut rng, 0.01..0.3);
            let g3: f64 = rand::Rng::gen_range(&mut rng, 0.01..0.3)
                * if rand::Rng::gen_bool(&mut rng, 0.5) { 1.0 } else { -1.0 };
            let norm_sq = g1 * g1 + g2 * g2 + g3 * g3;
            if norm_sq >= 0.24 {
                continue;
            }
            let a = gv(g1, g2, g3);
            // distinct vector of the same norm: rotate mass between components
            let h1: f64 = rand::Rng::gen_range(&mut rng, 0.01..0.3);
            if h1 * h1 >= norm_sq - 1e-4 {
                continue;
            }
            let rest = norm_sq - h1 * h1;
            let h2 = (rest * rand::Rng::gen_range(&mut rng, 0.1..0.9)).sqrt();
            let h3 = (rest - h2 * h2).sqrt()
                * if rand::Rng::gen_bool(&mut rng, 0.5) { 1.0 } else { -1.0 };
            if h2 == 0.0 || h3 == 0.0 {
                continue;
            }
            let b = gv(h1, h2, h3);
            if a.dist(&b) < 1e-9 {
                continue;
            }
            assert!(!locc_feasible(&a, &b).unwrap().feasible, "{a:?} -> {b:?}");
            assert!(!locc_feasible(&b, &a).unwrap().feasible, "{b:?} -> {a:?}");
            tested += 1;
        }
    }

    #[test]
    fn regions_nonempty_for_alpha() {
        let alpha = gv(0.09, 0.1, 0.08);
        let regions = accessible_region(&alpha, 0.01).unwrap();
        assert!(!regions.k_plus.is_empty());
        assert!(!regions.k_minus.is_empty());
        assert!(regions.min_gap > 0.0);
        assert!(regions.min_gap.is_finite());
    }

    #[test]
    fn witness_certificate_clean() {
        let alpha = gv(0.09, 0.1, 0.08);
        let witness = no_intermediate_witness(&alpha, 0.01).unwrap();
        assert!(witness.certificate.pair_feasible);
        assert_eq!(witness.certificate.violations, 0);
        assert!(witness.certificate.candidates_checked > 0);
        assert!(witness.xi_plus.components()[2] > 0.0);
        assert!(witness.xi_minus.components()[2] < 0.0);
        // the witness transformation moves outward in norm
        assert!(witness.xi_plus.norm() <= witness.xi_minus.norm() + 1e-12);
    }

    #[test]
    fn witness_mirror_symmetry() {
        // flipping the sign of α₃ mirrors the whole witness in γ₃
        let alpha = gv(0.09, 0.1, 0.08);
        let mirrored = gv(0.09, 0.1, -0.08);
        let w1 = no_intermediate_witness(&alpha, 0.02).unwrap();
        let w2 = no_intermediate_witness(&mirrored, 0.02).unwrap();
        for (a, b) in [
            (w1.xi_plus.components(), w2.xi_plus.components()),
            (w1.xi_minus.components(), w2.xi_minus.components()),
        ] {
            assert!((a[0] - b[0]).abs() < 1e-9);
            assert!((a[1] - b[1]).abs() < 1e-9);
            assert!((a[2] + b[2]).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_resolution_rejected() {
        let alpha = gv(0.09, 0.1, 0.08);
        assert!(matches!(
            accessible_region(&alpha, 0.5),
            Err(FourQubitError::BadResolution(_))
        ));
    }
}
