//! Survival analysis over transformation paths: hazard rates, cumulative
//! hazard, path success probabilities, product-integral cross-checks, path
//! length and the interconversion metric.
//!
//! The hazard at time t is the death rate of the entanglement,
//! h(t) = lim (1 − P[ψ(t), ψ(t+Δ)])/Δ, estimated by one-sided finite
//! differences with Richardson extrapolation; the success probability along a
//! path is exp(−∫h).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bipartite::{self, BipartiteError, SchmidtVector};
use crate::multipartite::{self, GenericStateDescriptor, MultiError};
use crate::path::{BipartitePath, PathError, PathSpec};
use crate::spectra;

/// Default absolute tolerance for cumulative-hazard integration.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Relative probability gap below which a path is certified optimal.
pub const OPTIMALITY_GAP: f64 = 1e-6;

const FD_STEP: f64 = 1e-4;
const JOINT_EPS: f64 = 1e-9;
const MAX_SIMPSON_DEPTH: usize = 48;
const REPORT_SAMPLES_PER_SEGMENT: usize = 32;

#[derive(Debug, Error)]
pub enum SurvivalError {
    #[error("times must satisfy 0 <= t1 <= t2 <= 1 (got {t1}, {t2})")]
    InvalidTimes { t1: f64, t2: f64 },
    #[error("path is not differentiable at t = {t} (segment joint)")]
    NonDifferentiablePoint { t: f64 },
    #[error("hazard rate appears non-integrable: {0}")]
    NonIntegrableHazard(String),
    #[error("states must belong to one family with equal dimensions: {0}")]
    FamilyMismatch(String),
    #[error("product integral needs at least 2 steps")]
    TooFewSteps,
    #[error(transparent)]
    Bipartite(#[from] BipartiteError),
    #[error(transparent)]
    Multipartite(#[from] MultiError),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// A state handed to the metric: one of the two supported families.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateDescriptor {
    Bipartite(SchmidtVector),
    Multipartite(GenericStateDescriptor),
}

/// Outcome of integrating the survival process along a path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurvivalReport {
    /// Cumulative hazard Λ = ∫₀¹ h dt.
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    /// Path success probability exp(−Λ).
    #[serde(rename = "P")]
    pub probability: f64,
    /// Endpoint optimum P(ψ(0), ψ(1)).
    #[serde(rename = "P_endpoint")]
    pub p_endpoint: f64,
    /// True when the path probability attains the endpoint optimum.
    pub optimal: bool,
    /// Maximum pointwise optimality defect over the sample grid.
    pub defect_max: f64,
    /// Hazard samples (t, h) on a per-segment midpoint grid.
    pub samples: Vec<(f64, f64)>,
    /// Number of hazard evaluations spent by the integrator.
    pub hazard_evals: usize,
}

/// Optimal conversion probability between two points of a path.
pub fn pairwise_prob(path: &PathSpec, t1: f64, t2: f64) -> Result<f64, SurvivalError> {
    if !(0.0..=1.0).contains(&t1) || !(0.0..=1.0).contains(&t2) || t1 > t2 {
        return Err(SurvivalError::InvalidTimes { t1, t2 });
    }
    if t1 == t2 {
        return Ok(1.0);
    }
    match path {
        PathSpec::Bipartite(p) => {
            let a = p.state_at(t1)?;
            let b = p.state_at(t2)?;
            Ok(bipartite::max_prob(&a, &b)?.0)
        }
        PathSpec::Multipartite(p) => {
            let from = p.ops_at(t1)?;
            let to = p.ops_at(t2)?;
            let mut rel = 1.0;
            for i in 0..from.len() {
                rel *= spectra::relative_eig_max(&from[i], &to[i]).map_err(MultiError::from)?;
            }
            let n1 = multipartite::seed_quadratic_form(p.seed(), p.n(), p.d(), &from);
            let n2 = multipartite::seed_quadratic_form(p.seed(), p.n(), p.d(), &to);
            Ok(((n2 / n1) / rel).min(1.0))
        }
    }
}

/// Hazard rate at an interior point. Errors at segment joints, where the path
/// is only piecewise differentiable; the integrators use per-segment one-sided
/// limits instead.
pub fn hazard(path: &PathSpec, t: f64) -> Result<f64, SurvivalError> {
    if !(0.0..1.0).contains(&t) && t != 0.0 {
        return Err(SurvivalError::InvalidTimes { t1: t, t2: t });
    }
    for joint in path.interior_joints() {
        if (t - joint).abs() <= JOINT_EPS {
            return Err(SurvivalError::NonDifferentiablePoint { t });
        }
    }
    let (lo, hi) = path.segment_bounds(t);
    hazard_in_segment(path, t, lo, hi)
}

/// One-sided finite-difference hazard with Richardson extrapolation, keeping
/// all evaluation points inside [lo, hi].
fn hazard_in_segment(path: &PathSpec, t: f64, lo: f64, hi: f64) -> Result<f64, SurvivalError> {
    let room_fwd = hi - t;
    let room_bwd = t - lo;
    let (step, forward) = if room_fwd >= room_bwd {
        (FD_STEP.min(room_fwd / 2.0), true)
    } else {
        (FD_STEP.min(room_bwd / 2.0), false)
    };
    if step < 1e-11 {
        return Err(SurvivalError::NonDifferentiablePoint { t });
    }
    let rate = |h: f64| -> Result<f64, SurvivalError> {
        let p = if forward {
            pairwise_prob(path, t, t + h)?
        } else {
            pairwise_prob(path, t - h, t)?
        };
        Ok((1.0 - p) / h)
    };
    let f1 = rate(step)?;
    let f2 = rate(step / 2.0)?;
    let mut extrapolated = 2.0 * f2 - f1;
    if (f1 - f2).abs() > 0.5 * f64::max(1.0, extrapolated.abs()) {
        return Err(SurvivalError::NonIntegrableHazard(format!(
            "finite-difference rates disagree at t = {t}: {f1} vs {f2}"
        )));
    }
    // The residual quadratic bias scales with h³Δ², so large hazards get a
    // second pass with the step shrunk in proportion to the first estimate.
    if extrapolated > 1.0 {
        let refined = (step / extrapolated).max(1e-7);
        if refined < 0.75 * step {
            let g1 = rate(refined)?;
            let g2 = rate(refined / 2.0)?;
            extrapolated = 2.0 * g2 - g1;
        }
    }
    Ok(extrapolated.max(0.0))
}

fn segment_grid(path: &PathSpec) -> Vec<(f64, f64)> {
    let mut cuts = vec![0.0];
    cuts.extend(path.interior_joints());
    cuts.push(1.0);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

struct Quadrature<'a> {
    path: &'a PathSpec,
    evals: usize,
}

impl<'a> Quadrature<'a> {
    fn hazard(&mut self, t: f64, lo: f64, hi: f64) -> Result<f64, SurvivalError> {
        self.evals += 1;
        hazard_in_segment(self.path, t, lo, hi)
    }

    /// Adaptive Simpson on one smooth segment.
    fn integrate_segment(&mut self, lo: f64, hi: f64, tol: f64) -> Result<f64, SurvivalError> {
        if hi - lo < 1e-14 {
            return Ok(0.0);
        }
        let fa = self.hazard(lo, lo, hi)?;
        let mid = 0.5 * (lo + hi);
        let fm = self.hazard(mid, lo, hi)?;
        let fb = self.hazard(hi, lo, hi)?;
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        self.adaptive(lo, hi, fa, fm, fb, whole, tol, lo, hi, 0)
    }

    #[allow(clippy::too_many_arguments)]
    fn adaptive(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        seg_lo: f64,
        seg_hi: f64,
        depth: usize,
    ) -> Result<f64, SurvivalError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.hazard(lm, seg_lo, seg_hi)?;
        let frm = self.hazard(rm, seg_lo, seg_hi)?;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || b - a < 1e-12 {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= MAX_SIMPSON_DEPTH {
            return Err(SurvivalError::NonIntegrableHazard(format!(
                "adaptive quadrature exhausted depth on [{a}, {b}]"
            )));
        }
        let l = self.adaptive(a, m, fa, flm, fm, left, tol / 2.0, seg_lo, seg_hi, depth + 1)?;
        let r = self.adaptive(m, b, fm, frm, fb, right, tol / 2.0, seg_lo, seg_hi, depth + 1)?;
        Ok(l + r)
    }
}

/// Cumulative hazard Λ = ∫₀¹ h dt with the evaluation count.
pub fn cumulative_hazard(path: &PathSpec, tol: f64) -> Result<(f64, usize), SurvivalError> {
    cumulative_hazard_over(path, 0.0, 1.0, tol)
}

/// Cumulative hazard over a sub-interval [t0, t1], split at segment joints so
/// the quadrature never straddles a kink.
pub fn cumulative_hazard_over(
    path: &PathSpec,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<(f64, usize), SurvivalError> {
    if !(0.0..=1.0).contains(&t0) || !(0.0..=1.0).contains(&t1) || t0 > t1 {
        return Err(SurvivalError::InvalidTimes { t1: t0, t2: t1 });
    }
    let mut quad = Quadrature { path, evals: 0 };
    let segments = segment_grid(path);
    let pieces: Vec<(f64, f64)> = segments
        .iter()
        .filter_map(|&(lo, hi)| {
            let a = lo.max(t0);
            let b = hi.min(t1);
            (b > a + 1e-15).then_some((a, b))
        })
        .collect();
    let mut lambda = 0.0;
    let per_piece_tol = tol / pieces.len().max(1) as f64;
    for (a, b) in pieces {
        lambda += quad.integrate_segment(a, b, per_piece_tol)?;
    }
    Ok((lambda, quad.evals))
}

/// Full survival report for a path: Λ, exp(−Λ), the endpoint optimum, the
/// optimality verdict and the pointwise defect maximum.
pub fn path_probability(path: &PathSpec, tol: f64) -> Result<SurvivalReport, SurvivalError> {
    let mut quad = Quadrature { path, evals: 0 };
    let mut lambda = 0.0;
    let segments = segment_grid(path);
    let per_seg_tol = tol / segments.len() as f64;
    let mut samples = Vec::new();
    for &(lo, hi) in &segments {
        lambda += quad.integrate_segment(lo, hi, per_seg_tol)?;
        for k in 0..REPORT_SAMPLES_PER_SEGMENT {
            let t = lo + (k as f64 + 0.5) / REPORT_SAMPLES_PER_SEGMENT as f64 * (hi - lo);
            samples.push((t, hazard_in_segment(path, t, lo, hi)?));
        }
    }
    let hazard_evals = quad.evals;
    let probability = (-lambda).exp();
    let p_endpoint = pairwise_prob(path, 0.0, 1.0)?;
    let optimal = probability >= p_endpoint * (1.0 - OPTIMALITY_GAP);

    let mut defect_max: f64 = 0.0;
    for &(lo, hi) in &segments {
        for k in 0..REPORT_SAMPLES_PER_SEGMENT {
            let t = lo + (k as f64 + 0.5) / REPORT_SAMPLES_PER_SEGMENT as f64 * (hi - lo);
            let defect = match path {
                PathSpec::Bipartite(p) => bip_growth_gap(p, t)?,
                PathSpec::Multipartite(_) => multipartite::path_optimality_defect(path, t)?,
            };
            defect_max = defect_max.max(defect);
        }
    }

    Ok(SurvivalReport {
        lambda,
        probability,
        p_endpoint,
        optimal,
        defect_max,
        samples,
        hazard_evals,
    })
}

/// Gap between the largest monotone growth rate and the growth of the
/// distinguished monotone E_l of the endpoint optimum; zero along pointwise
/// optimal bipartite paths.
fn bip_growth_gap(p: &BipartitePath, t: f64) -> Result<f64, SurvivalError> {
    let start = p.state_at(0.0)?;
    let end = p.state_at(1.0)?;
    let (_, l) = bipartite::max_prob(&start, &end)?;
    let seg = p
        .segments()
        .iter()
        .find(|s| t >= s.t0 && t <= s.t1)
        .expect("t inside [0,1]");
    let e_here = p.state_at(t)?.tail_sums();
    let e_from = seg.from.tail_sums();
    let e_to = seg.to.tail_sums();
    let dt = seg.t1 - seg.t0;
    let mut best = f64::NEG_INFINITY;
    let mut active = 0.0;
    for k in 0..e_here.len() {
        let slope = (e_to[k] - e_from[k]) / dt;
        let growth = slope / e_here[k];
        best = best.max(growth);
        if k + 1 == l {
            active = growth;
        }
    }
    Ok((best - active).max(0.0))
}

/// Right product integral Π (1 − h(t_k) Δt) on a uniform N-grid.
pub fn product_integral(path: &PathSpec, steps: usize) -> Result<f64, SurvivalError> {
    if steps < 2 {
        return Err(SurvivalError::TooFewSteps);
    }
    let dt = 1.0 / steps as f64;
    let mut product = 1.0;
    for k in 1..=steps {
        let t = k as f64 * dt;
        // right-limit convention at interior joints, left limit at t = 1
        let (lo, hi) = if t >= 1.0 {
            let (lo, _) = path.segment_bounds(1.0 - 1e-12);
            (lo, 1.0)
        } else {
            path.segment_bounds(t)
        };
        let h = hazard_in_segment(path, t.min(1.0), lo, hi)?;
        product *= (1.0 - h * dt).max(0.0);
    }
    Ok(product)
}

/// Length of a path in the interconversion metric: Λ\[ψ\] + Λ\[ψ_R\].
pub fn path_length(path: &PathSpec, tol: f64) -> Result<f64, SurvivalError> {
    let (fwd, _) = cumulative_hazard(path, tol)?;
    let (bwd, _) = cumulative_hazard(&path.reverse(), tol)?;
    Ok(fwd + bwd)
}

/// Interconversion metric d_I(a, b) = −log[P(a,b)·P(b,a)] on LU classes.
pub fn interconversion_distance(
    a: &StateDescriptor,
    b: &StateDescriptor,
) -> Result<f64, SurvivalError> {
    let product = match (a, b) {
        (StateDescriptor::Bipartite(x), StateDescriptor::Bipartite(y)) => {
            let (p1, _) = bipartite::max_prob(x, y)?;
            let (p2, _) = bipartite::max_prob(y, x)?;
            p1 * p2
        }
        (StateDescriptor::Multipartite(x), StateDescriptor::Multipartite(y)) => {
            if x.n() != y.n() || x.d() != y.d() {
                return Err(SurvivalError::FamilyMismatch(format!(
                    "{}x{} vs {}x{}",
                    x.n(),
                    y.n(),
                    x.d(),
                    y.d()
                )));
            }
            let seed_gap = x
                .seed()
                .iter()
                .zip(y.seed().iter())
                .map(|(p, q)| (p - q).norm())
                .fold(0.0f64, f64::max);
            if seed_gap > 1e-12 {
                return Err(SurvivalError::FamilyMismatch(
                    "descriptors must share the seed state".into(),
                ));
            }
            let (p1, _) = multipartite::max_prob_generic(x, y.op())?;
            let (p2, _) = multipartite::max_prob_generic(y, x.op())?;
            p1 * p2
        }
        _ => {
            return Err(SurvivalError::FamilyMismatch(
                "bipartite vs multipartite".into(),
            ))
        }
    };
    Ok(-product.ln())
}

/// End states of a path as metric operands.
pub fn endpoint_states(path: &PathSpec) -> Result<(StateDescriptor, StateDescriptor), SurvivalError> {
    match path {
        PathSpec::Bipartite(p) => Ok((
            StateDescriptor::Bipartite(p.state_at(0.0)?),
            StateDescriptor::Bipartite(p.state_at(1.0)?),
        )),
        PathSpec::Multipartite(p) => Ok((
            StateDescriptor::Multipartite(p.descriptor_at(0.0)?),
            StateDescriptor::Multipartite(p.descriptor_at(1.0)?),
        )),
    }
}

/// Twofold-optimality certificate: a path is a distance-minimizing geodesic
/// iff both traversal directions are optimal.
#[derive(Debug, Clone, Serialize)]
pub struct TwofoldReport {
    pub twofold: bool,
    pub geodesic: bool,
    pub forward: SurvivalReport,
    pub reverse: SurvivalReport,
    /// L\[ψ\] = Λ\[ψ\] + Λ\[ψ_R\].
    pub length: f64,
    /// d_I of the endpoints.
    pub distance: f64,
}

pub fn certify_twofold_optimal(path: &PathSpec, tol: f64) -> Result<TwofoldReport, SurvivalError> {
    let forward = path_probability(path, tol)?;
    let reverse = path_probability(&path.reverse(), tol)?;
    let (a, b) = endpoint_states(path)?;
    let distance = interconversion_distance(&a, &b)?;
    let twofold = forward.optimal && reverse.optimal;
    Ok(TwofoldReport {
        twofold,
        geodesic: twofold,
        length: forward.lambda + reverse.lambda,
        reverse,
        forward,
        distance,
    })
}
