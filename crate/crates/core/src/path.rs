//! One-parameter state families on t ∈ \[0,1\], shared by the protocol
//! constructors and the survival engine.
//!
//! Bipartite paths are piecewise-straight in Schmidt-vector space; the
//! multipartite kinds carry a seed plus a per-party operator family G_i(t)
//! with analytic derivatives.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bipartite::SchmidtVector;
use crate::multipartite::{GenericStateDescriptor, LocalPSDOperator, MultiError};
use crate::spectra::{ComplexMatrix, HermitianPD};

#[derive(Debug, Error)]
pub enum PathError {
    #[error("invalid path: {0}")]
    Invalid(String),
}

/// Fixed RNG seed for the amplitudes of the built-in qutrit counterexample
/// path; any full-support seed works, a frozen one keeps outputs reproducible.
const QUTRIT_SEED_RNG: u64 = 0x0051_EED0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bipartite,
    Multipartite,
}

/// Straight segment between two Schmidt vectors over [t0, t1].
#[derive(Debug, Clone)]
pub struct BipSegment {
    pub t0: f64,
    pub t1: f64,
    pub from: SchmidtVector,
    pub to: SchmidtVector,
}

/// Piecewise-straight bipartite path; segment time ranges partition \[0,1\].
#[derive(Debug, Clone)]
pub struct BipartitePath {
    segments: Vec<BipSegment>,
}

impl BipartitePath {
    /// Builds a path from consecutive waypoints, with equal time slices.
    pub fn from_waypoints(points: &[SchmidtVector]) -> Result<Self, PathError> {
        if points.len() < 2 {
            return Err(PathError::Invalid("need at least two waypoints".into()));
        }
        let d = points[0].d();
        if points.iter().any(|p| p.d() != d) {
            return Err(PathError::Invalid("waypoint dimensions differ".into()));
        }
        let m = points.len() - 1;
        let segments = (0..m)
            .map(|k| BipSegment {
                t0: k as f64 / m as f64,
                t1: (k + 1) as f64 / m as f64,
                from: points[k].clone(),
                to: points[k + 1].clone(),
            })
            .collect();
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[BipSegment] {
        &self.segments
    }

    pub fn d(&self) -> usize {
        self.segments[0].from.d()
    }

    fn segment_index(&self, t: f64) -> usize {
        if t >= 1.0 {
            return self.segments.len() - 1;
        }
        self.segments
            .iter()
            .position(|s| t < s.t1)
            .unwrap_or(self.segments.len() - 1)
    }

    pub fn state_at(&self, t: f64) -> Result<SchmidtVector, PathError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(PathError::Invalid(format!("t = {t} outside [0,1]")));
        }
        let seg = &self.segments[self.segment_index(t)];
        let s = if seg.t1 > seg.t0 {
            (t - seg.t0) / (seg.t1 - seg.t0)
        } else {
            0.0
        };
        let coeffs: Vec<f64> = seg
            .from
            .coeffs()
            .iter()
            .zip(seg.to.coeffs().iter())
            .map(|(a, b)| (1.0 - s) * a + s * b)
            .collect();
        SchmidtVector::new(coeffs).map_err(|e| PathError::Invalid(e.to_string()))
    }

    pub fn reverse(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| BipSegment {
                t0: 1.0 - s.t1,
                t1: 1.0 - s.t0,
                from: s.to.clone(),
                to: s.from.clone(),
            })
            .collect();
        Self { segments }
    }

    pub fn interior_joints(&self) -> Vec<f64> {
        self.segments
            .iter()
            .skip(1)
            .map(|s| s.t0)
            .collect()
    }
}

/// Named eigenvalue schedule shapes for diagonal-interpolation paths.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleForm {
    /// r_k(t) = 1 − (1 − r_k^f) t
    Linear,
    /// r_k(t) = (r_k^f)^t
    Exp,
    /// Piecewise-linear table of the normalized eigenvalues over \[0,1\].
    Tabulated { times: Vec<f64>, values: Vec<Vec<f64>> },
}

impl ScheduleForm {
    /// Checks the schedule against the per-party targets: start at 1, end at
    /// the targets, never increase.
    pub fn validate(&self, targets: &[f64]) -> Result<(), MultiError> {
        if targets.iter().any(|&r| r <= 0.0 || r.is_nan() || r > 1.0 + 1e-12) {
            return Err(MultiError::ScheduleNotMonotone(format!(
                "normalized targets must lie in (0, 1], got {targets:?}"
            )));
        }
        if let ScheduleForm::Tabulated { times, values } = self {
            if times.len() < 2 || times.len() != values.len() {
                return Err(MultiError::ScheduleNotMonotone(
                    "table needs matching times and values".into(),
                ));
            }
            if (times[0] - 0.0).abs() > 1e-12 || (times[times.len() - 1] - 1.0).abs() > 1e-12 {
                return Err(MultiError::ScheduleNotMonotone(
                    "table must cover [0, 1]".into(),
                ));
            }
            for w in times.windows(2) {
                if w[1] <= w[0] {
                    return Err(MultiError::ScheduleNotMonotone(
                        "table times must increase".into(),
                    ));
                }
            }
            for row in values {
                if row.len() != targets.len() {
                    return Err(MultiError::ScheduleNotMonotone(
                        "table row width must match the eigenvalue count".into(),
                    ));
                }
            }
            for k in 0..targets.len() {
                if (values[0][k] - 1.0).abs() > 1e-9 {
                    return Err(MultiError::ScheduleNotMonotone(format!(
                        "schedule component {k} must start at 1"
                    )));
                }
                if (values[values.len() - 1][k] - targets[k]).abs() > 1e-9 {
                    return Err(MultiError::ScheduleNotMonotone(format!(
                        "schedule component {k} must end at its target eigenvalue"
                    )));
                }
                for w in values.windows(2) {
                    if w[1][k] > w[0][k] + 1e-12 {
                        return Err(MultiError::ScheduleNotMonotone(format!(
                            "component {k} increases along the table"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn eval(&self, targets: &[f64], t: f64) -> Vec<f64> {
        match self {
            ScheduleForm::Linear => targets.iter().map(|&r| 1.0 - (1.0 - r) * t).collect(),
            ScheduleForm::Exp => targets.iter().map(|&r| (t * r.ln()).exp()).collect(),
            ScheduleForm::Tabulated { times, values } => {
                let (j, w) = bracket(times, t);
                values[j]
                    .iter()
                    .zip(values[j + 1].iter())
                    .map(|(a, b)| (1.0 - w) * a + w * b)
                    .collect()
            }
        }
    }

    fn eval_deriv(&self, targets: &[f64], t: f64) -> Vec<f64> {
        match self {
            ScheduleForm::Linear => targets.iter().map(|&r| -(1.0 - r)).collect(),
            ScheduleForm::Exp => targets
                .iter()
                .map(|&r| r.ln() * (t * r.ln()).exp())
                .collect(),
            ScheduleForm::Tabulated { times, values } => {
                let (j, _) = bracket(times, t);
                let dt = times[j + 1] - times[j];
                values[j]
                    .iter()
                    .zip(values[j + 1].iter())
                    .map(|(a, b)| (b - a) / dt)
                    .collect()
            }
        }
    }

    fn knots(&self) -> Vec<f64> {
        match self {
            ScheduleForm::Tabulated { times, .. } => times[1..times.len() - 1].to_vec(),
            _ => Vec::new(),
        }
    }
}

fn bracket(times: &[f64], t: f64) -> (usize, f64) {
    let mut j = times.len() - 2;
    for k in 0..times.len() - 1 {
        if t < times[k + 1] {
            j = k;
            break;
        }
    }
    let w = (t - times[j]) / (times[j + 1] - times[j]);
    (j, w.clamp(0.0, 1.0))
}

/// Per-party data of a diagonal-interpolation path.
#[derive(Debug, Clone)]
pub struct DiagInterpParty {
    pub unitary: ComplexMatrix,
    /// Normalized eigenvalue targets, descending, leading entry 1.
    pub targets: Vec<f64>,
    pub form: ScheduleForm,
}

/// Per-party data of the sequential twofold path.
#[derive(Debug, Clone)]
pub struct SeqParty {
    pub unitary: ComplexMatrix,
    /// ln λ_k of the target factor, descending λ.
    pub log_eigs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum MultiPathKind {
    DiagInterp { parties: Vec<DiagInterpParty> },
    SequentialTwofold { parties: Vec<SeqParty> },
    QutritCounterexample,
    Sampled { times: Vec<f64>, ops: Vec<LocalPSDOperator> },
}

/// Multipartite SLOCC path: a seed state together with the operator family
/// G(t) = ⊗ G_i(t). Reversal is a time reflection handled by a flag.
#[derive(Debug, Clone)]
pub struct MultipartitePath {
    n: usize,
    d: usize,
    seed: Vec<Complex64>,
    pub generic_asserted: bool,
    kind: MultiPathKind,
    reversed: bool,
}

impl MultipartitePath {
    pub fn new(
        n: usize,
        d: usize,
        seed: Vec<Complex64>,
        generic_asserted: bool,
        kind: MultiPathKind,
    ) -> Self {
        Self {
            n,
            d,
            seed,
            generic_asserted,
            kind,
            reversed: false,
        }
    }

    /// The paper's non-twofold qutrit example: party one follows
    /// u(t) Δ(t) u(t)† with Δ(t) = diag(1, 1 − t/4, 1 − t/2) on four qutrits.
    pub fn qutrit_counterexample() -> Self {
        let seed = crate::sampling::random_unit_vector(
            &mut crate::sampling::rng_from_seed(QUTRIT_SEED_RNG),
            81,
        );
        Self::new(4, 3, seed, true, MultiPathKind::QutritCounterexample)
    }

    pub fn sampled(
        n: usize,
        d: usize,
        seed: Vec<Complex64>,
        generic_asserted: bool,
        samples: Vec<(f64, LocalPSDOperator)>,
    ) -> Result<Self, PathError> {
        if samples.len() < 2 {
            return Err(PathError::Invalid("need at least two samples".into()));
        }
        let times: Vec<f64> = samples.iter().map(|(t, _)| *t).collect();
        if (times[0] - 0.0).abs() > 1e-12 || (times[times.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(PathError::Invalid("samples must cover [0, 1]".into()));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(PathError::Invalid("sample times must increase".into()));
            }
        }
        let ops: Vec<LocalPSDOperator> = samples.into_iter().map(|(_, op)| op).collect();
        if ops.iter().any(|op| op.n() != n || op.d() != d) {
            return Err(PathError::Invalid("sample operator shape mismatch".into()));
        }
        Ok(Self::new(
            n,
            d,
            seed,
            generic_asserted,
            MultiPathKind::Sampled { times, ops },
        ))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> &[Complex64] {
        &self.seed
    }

    pub fn kind(&self) -> &MultiPathKind {
        &self.kind
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn reverse(&self) -> Self {
        let mut out = self.clone();
        out.reversed = !out.reversed;
        out
    }

    fn t_eff(&self, t: f64) -> f64 {
        if self.reversed {
            1.0 - t
        } else {
            t
        }
    }

    /// G_i(t) for every party.
    pub fn ops_at(&self, t: f64) -> Result<Vec<HermitianPD>, MultiError> {
        let t = self.t_eff(t.clamp(0.0, 1.0));
        match &self.kind {
            MultiPathKind::DiagInterp { parties } => parties
                .iter()
                .map(|p| {
                    let r = p.form.eval(&p.targets, t);
                    rebuild(&p.unitary, &r)
                })
                .collect(),
            MultiPathKind::SequentialTwofold { parties } => {
                let n = parties.len() as f64;
                parties
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        let s = (n * t - j as f64).clamp(0.0, 1.0);
                        let eigs: Vec<f64> =
                            p.log_eigs.iter().map(|&l| (s * l).exp()).collect();
                        rebuild(&p.unitary, &eigs)
                    })
                    .collect()
            }
            MultiPathKind::QutritCounterexample => {
                let mut ops = vec![HermitianPD::identity(3); 4];
                ops[0] = qutrit_g(t)?;
                Ok(ops)
            }
            MultiPathKind::Sampled { times, ops } => {
                let (j, w) = bracket(times, t);
                (0..self.n)
                    .map(|i| {
                        let a = ops[j].party(i).matrix().scale(1.0 - w);
                        let b = ops[j + 1].party(i).matrix().scale(w);
                        HermitianPD::new(a.add(&b)).map_err(MultiError::from)
                    })
                    .collect()
            }
        }
    }

    /// Analytic dG_i/dt where the kind provides one.
    pub fn ops_deriv_at(&self, t: f64) -> Option<Result<Vec<ComplexMatrix>, MultiError>> {
        let sign = if self.reversed { -1.0 } else { 1.0 };
        let t = self.t_eff(t.clamp(0.0, 1.0));
        let raw: Result<Vec<ComplexMatrix>, MultiError> = match &self.kind {
            MultiPathKind::DiagInterp { parties } => Ok(parties
                .iter()
                .map(|p| rebuild_raw(&p.unitary, &p.form.eval_deriv(&p.targets, t)))
                .collect()),
            MultiPathKind::SequentialTwofold { parties } => {
                let n = parties.len() as f64;
                Ok(parties
                    .iter()
                    .enumerate()
                    .map(|(j, p)| {
                        let raw_s = n * t - j as f64;
                        if !(0.0..=1.0).contains(&raw_s) {
                            return ComplexMatrix::zeros(p.unitary.dim());
                        }
                        let vals: Vec<f64> = p
                            .log_eigs
                            .iter()
                            .map(|&l| n * l * (raw_s * l).exp())
                            .collect();
                        rebuild_raw(&p.unitary, &vals)
                    })
                    .collect())
            }
            MultiPathKind::QutritCounterexample => {
                let mut out = vec![ComplexMatrix::zeros(3); 4];
                out[0] = qutrit_g_deriv(t);
                Ok(out)
            }
            MultiPathKind::Sampled { times, ops } => {
                let (j, _) = bracket(times, t);
                let dt = times[j + 1] - times[j];
                Ok((0..self.n)
                    .map(|i| {
                        ops[j + 1]
                            .party(i)
                            .matrix()
                            .sub(ops[j].party(i).matrix())
                            .scale(1.0 / dt)
                    })
                    .collect())
            }
        };
        Some(raw.map(|v| v.into_iter().map(|m| m.scale(sign)).collect()))
    }

    /// Interior joint times where the family is only piecewise smooth.
    pub fn interior_joints(&self) -> Vec<f64> {
        let mut knots: Vec<f64> = match &self.kind {
            MultiPathKind::DiagInterp { parties } => parties
                .iter()
                .flat_map(|p| p.form.knots())
                .collect(),
            MultiPathKind::SequentialTwofold { parties } => {
                let n = parties.len();
                (1..n).map(|i| i as f64 / n as f64).collect()
            }
            MultiPathKind::QutritCounterexample => Vec::new(),
            MultiPathKind::Sampled { times, .. } => times[1..times.len() - 1].to_vec(),
        };
        if self.reversed {
            knots = knots.into_iter().map(|t| 1.0 - t).collect();
        }
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        knots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        knots
    }

    /// Smooth-segment bounds containing t.
    pub fn segment_bounds(&self, t: f64) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 1.0;
        for j in self.interior_joints() {
            if j <= t && j > lo {
                lo = j;
            }
            if j > t && j < hi {
                hi = j;
            }
        }
        (lo, hi)
    }

    pub fn descriptor_at(&self, t: f64) -> Result<GenericStateDescriptor, MultiError> {
        let ops = self.ops_at(t)?;
        GenericStateDescriptor::new(
            self.n,
            self.d,
            self.seed.clone(),
            LocalPSDOperator::new(ops)?,
            self.generic_asserted,
        )
    }
}

fn rebuild(u: &ComplexMatrix, eigs: &[f64]) -> Result<HermitianPD, MultiError> {
    HermitianPD::new(rebuild_raw(u, eigs)).map_err(MultiError::from)
}

fn rebuild_raw(u: &ComplexMatrix, eigs: &[f64]) -> ComplexMatrix {
    u.mul(&ComplexMatrix::diag_real(eigs)).mul(&u.adjoint()).symmetrized()
}

fn qutrit_u(t: f64) -> ComplexMatrix {
    let (s, c) = (t / 2.0).sin_cos();
    ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, s, c], &[0.0, -c, s]]).unwrap()
}

fn qutrit_u_deriv(t: f64) -> ComplexMatrix {
    let (s, c) = (t / 2.0).sin_cos();
    ComplexMatrix::from_real_rows(&[
        &[0.0, 0.0, 0.0],
        &[0.0, c / 2.0, -s / 2.0],
        &[0.0, s / 2.0, c / 2.0],
    ])
    .unwrap()
}

/// G(t) = u(t) Δ(t)² u(t)† with Δ(t) = diag(1, 1 − t/4, 1 − t/2).
fn qutrit_g(t: f64) -> Result<HermitianPD, MultiError> {
    let a = 1.0 - t / 4.0;
    let b = 1.0 - t / 2.0;
    let u = qutrit_u(t);
    rebuild(&u, &[1.0, a * a, b * b])
}

fn qutrit_g_deriv(t: f64) -> ComplexMatrix {
    let a = 1.0 - t / 4.0;
    let b = 1.0 - t / 2.0;
    let u = qutrit_u(t);
    let du = qutrit_u_deriv(t);
    let dd = ComplexMatrix::diag_real(&[0.0, -a / 2.0, -b]);
    let d = ComplexMatrix::diag_real(&[1.0, a * a, b * b]);
    du.mul(&d)
        .mul(&u.adjoint())
        .add(&u.mul(&dd).mul(&u.adjoint()))
        .add(&u.mul(&d).mul(&du.adjoint()))
        .symmetrized()
}

/// A one-parameter family of states on \[0,1\], bipartite or multipartite.
#[derive(Debug, Clone)]
pub enum PathSpec {
    Bipartite(BipartitePath),
    Multipartite(MultipartitePath),
}

impl PathSpec {
    pub fn family(&self) -> Family {
        match self {
            PathSpec::Bipartite(_) => Family::Bipartite,
            PathSpec::Multipartite(_) => Family::Multipartite,
        }
    }

    pub fn straight(from: &SchmidtVector, to: &SchmidtVector) -> Result<Self, PathError> {
        Ok(PathSpec::Bipartite(BipartitePath::from_waypoints(&[
            from.clone(),
            to.clone(),
        ])?))
    }

    pub fn piecewise(points: &[SchmidtVector]) -> Result<Self, PathError> {
        Ok(PathSpec::Bipartite(BipartitePath::from_waypoints(points)?))
    }

    pub fn reverse(&self) -> Self {
        match self {
            PathSpec::Bipartite(p) => PathSpec::Bipartite(p.reverse()),
            PathSpec::Multipartite(p) => PathSpec::Multipartite(p.reverse()),
        }
    }

    pub fn interior_joints(&self) -> Vec<f64> {
        match self {
            PathSpec::Bipartite(p) => p.interior_joints(),
            PathSpec::Multipartite(p) => p.interior_joints(),
        }
    }

    pub fn segment_bounds(&self, t: f64) -> (f64, f64) {
        match self {
            PathSpec::Bipartite(p) => {
                let idx = p.segment_index(t);
                (p.segments()[idx].t0, p.segments()[idx].t1)
            }
            PathSpec::Multipartite(p) => p.segment_bounds(t),
        }
    }
}

// ---------------------------------------------------------------------------
// Wire format.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SegmentWire {
    kind: String,
    from: SchmidtVector,
    to: SchmidtVector,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScheduleWire {
    Named(String),
    Tabulated {
        tabulated: TableWire,
    },
}

#[derive(Serialize, Deserialize)]
struct TableWire {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct DiagPartyWire {
    unitary: ComplexMatrix,
    targets: Vec<f64>,
    schedule: ScheduleWire,
}

#[derive(Serialize, Deserialize)]
struct PathWire {
    family: Family,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    segments: Option<Vec<SegmentWire>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generic_asserted: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parties: Option<Vec<DiagPartyWire>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<LocalPSDOperator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<(f64, LocalPSDOperator)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reversed: Option<bool>,
}

impl From<&ScheduleForm> for ScheduleWire {
    fn from(form: &ScheduleForm) -> Self {
        match form {
            ScheduleForm::Linear => ScheduleWire::Named("linear".into()),
            ScheduleForm::Exp => ScheduleWire::Named("exp".into()),
            ScheduleForm::Tabulated { times, values } => ScheduleWire::Tabulated {
                tabulated: TableWire {
                    times: times.clone(),
                    values: values.clone(),
                },
            },
        }
    }
}

impl TryFrom<ScheduleWire> for ScheduleForm {
    type Error = PathError;

    fn try_from(wire: ScheduleWire) -> Result<Self, PathError> {
        match wire {
            ScheduleWire::Named(name) => match name.as_str() {
                "linear" => Ok(ScheduleForm::Linear),
                "exp" => Ok(ScheduleForm::Exp),
                other => Err(PathError::Invalid(format!("unknown schedule '{other}'"))),
            },
            ScheduleWire::Tabulated { tabulated } => Ok(ScheduleForm::Tabulated {
                times: tabulated.times,
                values: tabulated.values,
            }),
        }
    }
}

impl Serialize for PathSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let wire = match self {
            PathSpec::Bipartite(p) => PathWire {
                family: Family::Bipartite,
                kind: if p.segments().len() == 1 {
                    "straight".into()
                } else {
                    "piecewise".into()
                },
                segments: Some(
                    p.segments()
                        .iter()
                        .map(|seg| SegmentWire {
                            kind: "straight".into(),
                            from: seg.from.clone(),
                            to: seg.to.clone(),
                        })
                        .collect(),
                ),
                n: None,
                d: None,
                seed: None,
                generic_asserted: None,
                parties: None,
                g: None,
                samples: None,
                reversed: None,
            },
            PathSpec::Multipartite(p) => {
                let mut wire = PathWire {
                    family: Family::Multipartite,
                    kind: String::new(),
                    segments: None,
                    n: Some(p.n()),
                    d: Some(p.d()),
                    seed: Some(p.seed().iter().map(|z| [z.re, z.im]).collect()),
                    generic_asserted: Some(p.generic_asserted),
                    parties: None,
                    g: None,
                    samples: None,
                    reversed: if p.is_reversed() { Some(true) } else { None },
                };
                match p.kind() {
                    MultiPathKind::DiagInterp { parties } => {
                        wire.kind = "diag_interp".into();
                        wire.parties = Some(
                            parties
                                .iter()
                                .map(|party| DiagPartyWire {
                                    unitary: party.unitary.clone(),
                                    targets: party.targets.clone(),
                                    schedule: (&party.form).into(),
                                })
                                .collect(),
                        );
                    }
                    MultiPathKind::SequentialTwofold { parties } => {
                        wire.kind = "sequential_twofold".into();
                        let factors: Result<Vec<HermitianPD>, _> = parties
                            .iter()
                            .map(|party| {
                                let eigs: Vec<f64> =
                                    party.log_eigs.iter().map(|l| l.exp()).collect();
                                HermitianPD::new(rebuild_raw(&party.unitary, &eigs))
                            })
                            .collect();
                        let factors = factors.map_err(serde::ser::Error::custom)?;
                        wire.g = Some(
                            LocalPSDOperator::new(factors).map_err(serde::ser::Error::custom)?,
                        );
                    }
                    MultiPathKind::QutritCounterexample => {
                        wire.kind = "qutrit_counterexample".into();
                        wire.n = None;
                        wire.d = None;
                        wire.seed = None;
                        wire.generic_asserted = None;
                    }
                    MultiPathKind::Sampled { times, ops } => {
                        wire.kind = "sampled".into();
                        wire.samples = Some(
                            times
                                .iter()
                                .cloned()
                                .zip(ops.iter().cloned())
                                .collect(),
                        );
                    }
                }
                wire
            }
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PathSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = PathWire::deserialize(de)?;
        let spec = match wire.family {
            Family::Bipartite => {
                let segments = wire
                    .segments
                    .ok_or_else(|| D::Error::custom("bipartite path needs segments"))?;
                if segments.iter().any(|s| s.kind != "straight") {
                    return Err(D::Error::custom("bipartite segments must be straight"));
                }
                match wire.kind.as_str() {
                    "straight" => {
                        if segments.len() != 1 {
                            return Err(D::Error::custom(
                                "kind 'straight' takes exactly one segment",
                            ));
                        }
                    }
                    "piecewise" => {}
                    other => return Err(D::Error::custom(format!("unknown kind '{other}'"))),
                }
                let mut points = vec![segments[0].from.clone()];
                for seg in &segments {
                    if seg.from.max_abs_diff(points.last().unwrap()) > 1e-9 {
                        return Err(D::Error::custom("segments are not contiguous"));
                    }
                    points.push(seg.to.clone());
                }
                PathSpec::Bipartite(
                    BipartitePath::from_waypoints(&points).map_err(D::Error::custom)?,
                )
            }
            Family::Multipartite => {
                if wire.kind == "qutrit_counterexample" {
                    let mut p = MultipartitePath::qutrit_counterexample();
                    if wire.reversed == Some(true) {
                        p = p.reverse();
                    }
                    return Ok(PathSpec::Multipartite(p));
                }
                let n = wire.n.ok_or_else(|| D::Error::custom("missing n"))?;
                let d = wire.d.ok_or_else(|| D::Error::custom("missing d"))?;
                let seed = wire
                    .seed
                    .ok_or_else(|| D::Error::custom("missing seed"))?
                    .iter()
                    .map(|p| Complex64::new(p[0], p[1]))
                    .collect::<Vec<_>>();
                let asserted = wire.generic_asserted.unwrap_or(true);
                let norm: f64 = seed.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-12 || seed.len() != d.pow(n as u32) {
                    return Err(D::Error::custom("seed must be normalized of length d^n"));
                }
                let mut path = match wire.kind.as_str() {
                    "diag_interp" => {
                        let parties = wire
                            .parties
                            .ok_or_else(|| D::Error::custom("diag_interp needs parties"))?;
                        if parties.len() != n {
                            return Err(D::Error::custom("need one schedule per party"));
                        }
                        let mut built = Vec::with_capacity(n);
                        for p in parties {
                            let form: ScheduleForm =
                                p.schedule.try_into().map_err(D::Error::custom)?;
                            form.validate(&p.targets).map_err(D::Error::custom)?;
                            if p.unitary.dim() != d || p.targets.len() != d {
                                return Err(D::Error::custom("party shape mismatch"));
                            }
                            built.push(DiagInterpParty {
                                unitary: p.unitary,
                                targets: p.targets,
                                form,
                            });
                        }
                        MultipartitePath::new(
                            n,
                            d,
                            seed,
                            asserted,
                            MultiPathKind::DiagInterp { parties: built },
                        )
                    }
                    "sequential_twofold" => {
                        let g = wire
                            .g
                            .ok_or_else(|| D::Error::custom("sequential_twofold needs g"))?;
                        let descriptor = GenericStateDescriptor::new(n, d, seed, g, asserted)
                            .map_err(D::Error::custom)?;
                        match crate::multipartite::make_sequential_twofold_path(&descriptor)
                            .map_err(D::Error::custom)?
                        {
                            PathSpec::Multipartite(p) => p,
                            PathSpec::Bipartite(_) => unreachable!(),
                        }
                    }
                    "sampled" => {
                        let samples = wire
                            .samples
                            .ok_or_else(|| D::Error::custom("sampled needs samples"))?;
                        MultipartitePath::sampled(n, d, seed, asserted, samples)
                            .map_err(D::Error::custom)?
                    }
                    other => return Err(D::Error::custom(format!("unknown kind '{other}'"))),
                };
                if wire.reversed == Some(true) {
                    path = path.reverse();
                }
                PathSpec::Multipartite(path)
            }
        };
        Ok(spec)
    }
}
