//! entflow: JSON-in/JSON-out front end for optimal entanglement
//! transformations.
//!
//! Exit codes: 0 success; 2 invalid input (schema or invariant violation);
//! 3 precondition or infeasibility; 4 numerical failure; 1 acceptance-suite
//! failure.

mod format;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use entflow_core::bipartite::{self, BipartiteError, SchmidtVector};
use entflow_core::fourqubit::{self, FourQubitError, GammaVector};
use entflow_core::multipartite::{self, GenericStateDescriptor, LocalPSDOperator, MultiError, ProductState};
use entflow_core::path::{PathSpec, ScheduleForm};
use entflow_core::protocols::{self, ProtocolError, SegmentedUnitVectors};
use entflow_core::sampling;
use entflow_core::survival::{self, StateDescriptor, SurvivalError};
use entflow_core::{acceptance, spectra};

#[derive(Parser)]
#[command(name = "entflow", version, about = "optimal single-copy entanglement transformations")]
struct Cli {
    /// Write the JSON result to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bipartite states: probabilities, lattice, intermediates, protocols.
    Bip {
        #[command(subcommand)]
        command: BipCommand,
    },
    /// Generic multipartite states.
    Multi {
        #[command(subcommand)]
        command: MultiCommand,
    },
    /// Survival-analysis integration over paths.
    Survival {
        #[command(subcommand)]
        command: SurvivalCommand,
    },
    /// Interconversion metric between two states of one family.
    Metric {
        /// State file (Schmidt vector or generic descriptor JSON).
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// The nongeneric 4-qubit family.
    Fourqubit {
        #[command(subcommand)]
        command: FourQubitCommand,
    },
    /// Batch runners.
    Suite {
        #[command(subcommand)]
        command: SuiteCommand,
    },
}

#[derive(Args)]
struct PairArgs {
    /// Initial state JSON file.
    #[arg(long)]
    psi: PathBuf,
    /// Final state JSON file.
    #[arg(long)]
    phi: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeOp {
    Meet,
    Join,
}

#[derive(Clone, Copy, ValueEnum)]
enum BipPathKind {
    Straight,
    Most,
    Least,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitsFrom {
    Psi,
    Phi,
}

#[derive(Subcommand)]
enum BipCommand {
    /// Optimal conversion probability P(Ψ, Φ) and the minimizing index.
    Prob(PairArgs),
    /// Majorization-lattice meet or join.
    Lattice {
        #[arg(value_enum)]
        op: LatticeOp,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Membership of χ in the lattice interval [Ψ, Φ].
    Interval {
        #[arg(long)]
        chi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        phi: PathBuf,
    },
    /// Optimal-intermediate-state check for χ between Ψ and Φ.
    Intermediate {
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        chi: PathBuf,
        #[arg(long)]
        phi: PathBuf,
    },
    /// Deterministic waypoint ξ of the LOCC → OSBP protocol.
    Xi(PairArgs),
    /// The ζ/η intermediate pair over segmented unit vectors.
    ZetaEta {
        #[command(flatten)]
        pair: PairArgs,
        /// JSON file {"boundaries": [...], "vectors": [[...], ...]}.
        #[arg(long, conflicts_with = "units_from")]
        units: Option<PathBuf>,
        /// Canonical per-segment normalization of λ(Ψ) or λ(Φ).
        #[arg(long, value_enum)]
        units_from: Option<UnitsFrom>,
    },
    /// Most entangled state reachable from Ψ with probability p.
    Chimax {
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        p: f64,
    },
    /// Least entangled state from which Φ is reachable with probability p.
    Chimin {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        p: f64,
    },
    /// Direct one-successful-branch-protocol criterion.
    Osbp(PairArgs),
    /// Survival check of a bipartite path (from a file or a named kind).
    PathCheck {
        #[arg(long, required_unless_present = "psi")]
        path: Option<PathBuf>,
        #[arg(long, requires = "phi")]
        psi: Option<PathBuf>,
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "straight")]
        kind: BipPathKind,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Three-operator measurement emitter for d = 3.
    Mops {
        #[command(flatten)]
        pair: PairArgs,
        /// Branch probabilities p1,p2,p3 with Σp ≤ P(Ψ, Φ).
        #[arg(long, value_delimiter = ',')]
        probs: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MultiPathChoice {
    DiagInterp,
    SequentialTwofold,
    QutritCounterexample,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleChoice {
    Linear,
    Exp,
}

#[derive(Subcommand)]
enum MultiCommand {
    /// Conversion probability from a descriptor to a target operator.
    Prob {
        /// GenericStateDescriptor JSON file.
        #[arg(long)]
        psi: PathBuf,
        /// Target LocalPSDOperator JSON file {"parties": [...]}.
        #[arg(long)]
        h: PathBuf,
        /// Monte-Carlo product samples for the min-ratio cross-check
        /// (0 skips the sampling block).
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Refine the sampled minimum by per-party eigenvectors.
        #[arg(long)]
        refine: bool,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Monotone E_x(Ψ) = ⟨x|G|x⟩ for a product state x.
    Monotone {
        #[arg(long)]
        psi: PathBuf,
        /// ProductState JSON file {"factors": [...]}.
        #[arg(long)]
        x: PathBuf,
    },
    /// Monotone values on the canonical product frame.
    Fingerprint {
        /// LocalPSDOperator JSON file.
        #[arg(long)]
        g: PathBuf,
    },
    /// Reconstruct an operator from fingerprint values.
    Reconstruct {
        /// {"n": ., "d": ., "values": [...]} on the canonical frame, or
        /// {"pairs": [[ProductState, value], ...]}.
        #[arg(long)]
        fingerprint: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
    /// Intermediate-state criterion and the sufficient per-party conditions.
    Intermediate {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        h: PathBuf,
    },
    /// Survival check of a multipartite path.
    PathCheck {
        #[arg(long)]
        path: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Construct a built-in optimal path.
    MakePath {
        #[arg(long, value_enum)]
        kind: MultiPathChoice,
        /// Target GenericStateDescriptor JSON (ignored by the qutrit example).
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "linear")]
        schedule: ScheduleChoice,
    },
}

#[derive(Subcommand)]
enum SurvivalCommand {
    /// Cumulative hazard, path probability and optimality verdict.
    Integrate {
        #[arg(long)]
        path: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Path length Λ(ψ) + Λ(ψ_R) and the endpoint distance.
    Length {
        #[arg(long)]
        path: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Right product integral on a uniform grid.
    ProductIntegral {
        #[arg(long)]
        path: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
    },
}

#[derive(Subcommand)]
enum FourQubitCommand {
    /// LOCC feasibility src → dst via the four ratio inequalities.
    Feasible {
        #[arg(long, value_delimiter = ',')]
        src: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        dst: Vec<f64>,
    },
    /// Accessible region split by the sign of γ₃.
    Regions {
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 0.01)]
        grid: f64,
    },
    /// No-intermediate-state witness search.
    Witness {
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 0.005)]
        grid: f64,
    },
}

#[derive(Subcommand)]
enum SuiteCommand {
    /// Run the acceptance criteria and print one line per criterion.
    Acceptance {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Run a single criterion by id.
        #[arg(long)]
        only: Option<usize>,
    },
}

enum CliError {
    Invalid(String),
    Precondition(String),
    Numerical(String),
    SuiteFailed,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::SuiteFailed => 1,
            CliError::Invalid(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::SuiteFailed => "acceptance suite failed",
            CliError::Invalid(m) | CliError::Precondition(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<BipartiteError> for CliError {
    fn from(e: BipartiteError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<MultiError> for CliError {
    fn from(e: MultiError) -> Self {
        match e {
            MultiError::Spectra(spectra::SpectraError::NoConvergence) => {
                CliError::Numerical(e.to_string())
            }
            MultiError::BadDescriptor(_)
            | MultiError::SeedNotNormalized(_)
            | MultiError::InputTooLarge(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<SurvivalError> for CliError {
    fn from(e: SurvivalError) -> Self {
        match e {
            SurvivalError::NonIntegrableHazard(_) => CliError::Numerical(e.to_string()),
            SurvivalError::TooFewSteps => CliError::Invalid(e.to_string()),
            SurvivalError::Multipartite(inner) => CliError::from(inner),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<FourQubitError> for CliError {
    fn from(e: FourQubitError) -> Self {
        match e {
            FourQubitError::BadResolution(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &PathBuf) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn gamma_from_flags(raw: &[f64], flag: &str) -> Result<GammaVector, CliError> {
    if raw.len() != 3 {
        return Err(CliError::Invalid(format!(
            "--{flag} needs exactly three comma-separated components"
        )));
    }
    GammaVector::new([raw[0], raw[1], raw[2]]).map_err(|e| CliError::Invalid(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(value) => {
            let text = format::to_json_string(&value);
            match cli.out {
                Some(path) => {
                    if let Err(e) = fs::write(&path, text + "\n") {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => println!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn dispatch(command: Command) -> Result<Value, CliError> {
    match command {
        Command::Bip { command } => run_bip(command),
        Command::Multi { command } => run_multi(command),
        Command::Survival { command } => run_survival(command),
        Command::Metric { a, b } => {
            let a: StateDescriptor = read_json(&a)?;
            let b: StateDescriptor = read_json(&b)?;
            let d = survival::interconversion_distance(&a, &b)?;
            Ok(json!({ "d_I": d }))
        }
        Command::Fourqubit { command } => run_fourqubit(command),
        Command::Suite { command } => run_suite(command),
    }
}

fn run_bip(command: BipCommand) -> Result<Value, CliError> {
    match command {
        BipCommand::Prob(pair) => {
            let psi: SchmidtVector = read_json(&pair.psi)?;
            let phi: SchmidtVector = read_json(&pair.phi)?;
            let (p, argmin_l) = bipartite::max_prob(&psi, &phi)?;
            Ok(json!({ "p": p, "argmin_l": argmin_l }))
        }
        BipCommand::Lattice { op, a, b } => {
            let a: SchmidtVector = read_json(&a)?;
            let b: SchmidtVector = read_json(&b)?;
            let result = match op {
                LatticeOp::Meet => bipartite::lattice_meet(&a, &b)?,
                LatticeOp::Join => bipartite::lattice_join(&a, &b)?,
            };
            Ok(serde_json::to_value(result).unwrap())
        }
        BipCommand::Interval { chi, psi, phi } => {
            let chi: SchmidtVector = read_json(&chi)?;
            let psi: SchmidtVector = read_json(&psi)?;
            let phi: SchmidtVector = read_json(&phi)?;
            let inside = bipartite::in_interval(&chi, &psi, &phi)?;
            Ok(json!({ "in_interval": inside }))
        }
        BipCommand::Intermediate { psi, chi, phi } => {
            let psi: SchmidtVector = read_json(&psi)?;
            let chi: SchmidtVector = read_json(&chi)?;
            let phi: SchmidtVector = read_json(&phi)?;
            let check = bipartite::is_intermediate(&psi, &chi, &phi)?;
            Ok(json!({
                "intermediate": check.verdict,
                "l": check.l,
                "trivial_endpoint": check.trivial_endpoint,
            }))
        }
        BipCommand::Xi(pair) => {
            let psi: SchmidtVector = read_json(&pair.psi)?;
            let phi: SchmidtVector = read_json(&pair.phi)?;
            let xi = protocols::xi_state(&psi, &phi)?;
            Ok(serde_json::to_value(xi).unwrap())
        }
        BipCommand::ZetaEta { pair, units, units_from } => {
            let psi: SchmidtVector = read_json(&pair.psi)?;
            let phi: SchmidtVector = read_json(&pair.phi)?;
            let units = match (units, units_from) {
                (Some(file), _) => {
                    #[derive(serde::Deserialize)]
                    struct UnitsWire {
                        boundaries: Vec<usize>,
                        vectors: Vec<Vec<f64>>,
                    }
                    let wire: UnitsWire = read_json(&file)?;
                    Some(SegmentedUnitVectors::new(
                        wire.boundaries,
                        wire.vectors,
                        &psi,
                        &phi,
                    )?)
                }
                (None, Some(which)) => {
                    let boundaries = protocols::xi_boundaries(&psi, &phi)?;
                    let source = match which {
                        UnitsFrom::Psi => &psi,
                        UnitsFrom::Phi => &phi,
                    };
                    Some(SegmentedUnitVectors::from_state(
                        boundaries, source, &psi, &phi,
                    )?)
                }
                (None, None) => None,
            };
            let (zeta, eta) = protocols::zeta_eta(&psi, &phi, units.as_ref())?;
            Ok(json!({ "zeta": zeta, "eta": eta }))
        }
        BipCommand::Chimax { psi, p } => {
            let psi: SchmidtVector = read_json(&psi)?;
            let chi = protocols::chi_max(&psi, p)?;
            Ok(serde_json::to_value(chi).unwrap())
        }
        BipCommand::Chimin { phi, p } => {
            let phi: SchmidtVector = read_json(&phi)?;
            let chi = protocols::chi_min(&phi, p)?;
            Ok(serde_json::to_value(chi).unwrap())
        }
        BipCommand::Osbp(pair) => {
            let psi: SchmidtVector = read_json(&pair.psi)?;
            let phi: SchmidtVector = read_json(&pair.phi)?;
            let possible = bipartite::osbp_direct_possible(&psi, &phi)?;
            Ok(json!({ "osbp_direct": possible }))
        }
        BipCommand::PathCheck { path, psi, phi, kind, tol } => {
            let spec = match path {
                Some(file) => {
                    let spec: PathSpec = read_json(&file)?;
                    if !matches!(spec, PathSpec::Bipartite(_)) {
                        return Err(CliError::Invalid(
                            "bip path-check expects a bipartite path".into(),
                        ));
                    }
                    spec
                }
                None => {
                    let psi: SchmidtVector = read_json(&psi.expect("clap enforces --psi"))?;
                    let phi_path = phi.ok_or_else(|| {
                        CliError::Invalid("--phi is required with --psi".into())
                    })?;
                    let phi: SchmidtVector = read_json(&phi_path)?;
                    match kind {
                        BipPathKind::Straight => protocols::straight_path(&psi, &phi)?,
                        BipPathKind::Most => protocols::most_entangled_path(&psi, &phi)?,
                        BipPathKind::Least => protocols::least_entangled_path(&psi, &phi)?,
                    }
                }
            };
            let report = survival::path_probability(&spec, tol)?;
            Ok(json!({ "path": spec, "report": report }))
        }
        BipCommand::Mops { pair, probs } => {
            let psi: SchmidtVector = read_json(&pair.psi)?;
            let phi: SchmidtVector = read_json(&pair.phi)?;
            if probs.len() != 3 {
                return Err(CliError::Invalid(
                    "--probs needs exactly three comma-separated values".into(),
                ));
            }
            let set =
                protocols::emit_measurement_operators(&psi, &phi, [probs[0], probs[1], probs[2]])?;
            Ok(serde_json::to_value(set).unwrap())
        }
    }
}

fn run_multi(command: MultiCommand) -> Result<Value, CliError> {
    match command {
        MultiCommand::Prob { psi, h, samples, refine, seed } => {
            let psi: GenericStateDescriptor = read_json(&psi)?;
            let h: LocalPSDOperator = read_json(&h)?;
            let (p, exact) = multipartite::max_prob_generic(&psi, &h)?;
            let mut doc = json!({ "p": p, "exact": exact });
            if samples > 0 {
                let mut rng = sampling::rng_from_seed(seed);
                let report =
                    multipartite::min_ratio_over_products(&psi, &h, samples, refine, &mut rng)?;
                doc["min_ratio"] = serde_json::to_value(report).unwrap();
            }
            Ok(doc)
        }
        MultiCommand::Monotone { psi, x } => {
            let psi: GenericStateDescriptor = read_json(&psi)?;
            let x: ProductState = read_json(&x)?;
            let value = multipartite::monotone_ex(&psi, &x)?;
            Ok(json!({ "E_x": value }))
        }
        MultiCommand::Fingerprint { g } => {
            let g: LocalPSDOperator = read_json(&g)?;
            let frame = multipartite::product_frame(g.n(), g.d());
            let values = multipartite::fingerprint(&g, &frame);
            Ok(json!({
                "n": g.n(),
                "d": g.d(),
                "frame_size": frame.len(),
                "values": values,
            }))
        }
        MultiCommand::Reconstruct { fingerprint, n, d } => {
            #[derive(serde::Deserialize)]
            struct FingerprintWire {
                #[serde(default)]
                values: Option<Vec<f64>>,
                #[serde(default)]
                pairs: Option<Vec<(ProductState, f64)>>,
            }
            let wire: FingerprintWire = read_json(&fingerprint)?;
            let pairs: Vec<(ProductState, f64)> = match (wire.values, wire.pairs) {
                (Some(values), None) => {
                    let frame = multipartite::product_frame(n, d);
                    if values.len() != frame.len() {
                        return Err(CliError::Invalid(format!(
                            "expected {} canonical-frame values, got {}",
                            frame.len(),
                            values.len()
                        )));
                    }
                    frame.into_iter().zip(values).collect()
                }
                (None, Some(pairs)) => pairs,
                _ => {
                    return Err(CliError::Invalid(
                        "fingerprint file needs either 'values' or 'pairs'".into(),
                    ))
                }
            };
            let rec = multipartite::reconstruct_from_fingerprint(&pairs, n, d)?;
            Ok(json!({
                "global": rec.global,
                "local": rec.local,
                "perturbed": rec.perturbed,
                "clamp_magnitude": rec.clamp_magnitude,
            }))
        }
        MultiCommand::Intermediate { g, h } => {
            let g: LocalPSDOperator = read_json(&g)?;
            let h: LocalPSDOperator = read_json(&h)?;
            let criterion = multipartite::is_intermediate_generic(&g, &h)?;
            let (holds, per_party) = multipartite::sufficient_conditions_check(&g, &h)?;
            Ok(json!({
                "intermediate": criterion,
                "sufficient_conditions": holds,
                "per_party": per_party,
                // the converse of the conditions is established for qubits only
                "conditions_complete_for_d": 2,
            }))
        }
        MultiCommand::PathCheck { path, tol } => {
            let spec: PathSpec = read_json(&path)?;
            if !matches!(spec, PathSpec::Multipartite(_)) {
                return Err(CliError::Invalid(
                    "multi path-check expects a multipartite path".into(),
                ));
            }
            let report = survival::path_probability(&spec, tol)?;
            Ok(serde_json::to_value(report).unwrap())
        }
        MultiCommand::MakePath { kind, target, schedule } => {
            let spec = match kind {
                MultiPathChoice::QutritCounterexample => PathSpec::Multipartite(
                    entflow_core::path::MultipartitePath::qutrit_counterexample(),
                ),
                MultiPathChoice::DiagInterp => {
                    let target: GenericStateDescriptor = read_json(&target.ok_or_else(|| {
                        CliError::Invalid("--target is required for diag_interp".into())
                    })?)?;
                    let form = match schedule {
                        ScheduleChoice::Linear => ScheduleForm::Linear,
                        ScheduleChoice::Exp => ScheduleForm::Exp,
                    };
                    multipartite::make_diag_interp_path(&target, &form)?
                }
                MultiPathChoice::SequentialTwofold => {
                    let target: GenericStateDescriptor = read_json(&target.ok_or_else(|| {
                        CliError::Invalid("--target is required for sequential_twofold".into())
                    })?)?;
                    multipartite::make_sequential_twofold_path(&target)?
                }
            };
            Ok(serde_json::to_value(spec).unwrap())
        }
    }
}

fn run_survival(command: SurvivalCommand) -> Result<Value, CliError> {
    match command {
        SurvivalCommand::Integrate { path, tol } => {
            let spec: PathSpec = read_json(&path)?;
            let report = survival::path_probability(&spec, tol)?;
            let product = survival::product_integral(&spec, 10_000)?;
            let mut doc = serde_json::to_value(report).unwrap();
            doc["P_product"] = json!(product);
            Ok(doc)
        }
        SurvivalCommand::Length { path, tol } => {
            let spec: PathSpec = read_json(&path)?;
            let length = survival::path_length(&spec, tol)?;
            let (forward, _) = survival::cumulative_hazard(&spec, tol)?;
            let (a, b) = survival::endpoint_states(&spec)?;
            let distance = survival::interconversion_distance(&a, &b)?;
            Ok(json!({
                "L": length,
                "Lambda_forward": forward,
                "Lambda_reverse": length - forward,
                "d_I_endpoints": distance,
            }))
        }
        SurvivalCommand::ProductIntegral { path, steps } => {
            let spec: PathSpec = read_json(&path)?;
            let product = survival::product_integral(&spec, steps)?;
            Ok(json!({ "P_product": product, "steps": steps }))
        }
    }
}

fn run_fourqubit(command: FourQubitCommand) -> Result<Value, CliError> {
    match command {
        FourQubitCommand::Feasible { src, dst } => {
            let src = gamma_from_flags(&src, "src")?;
            let dst = gamma_from_flags(&dst, "dst")?;
            let feasibility = fourqubit::locc_feasible(&src, &dst)?;
            Ok(json!({
                "feasible": feasibility.feasible,
                "r": feasibility.r,
                "slack": feasibility.slack,
                "norm_measure_src": fourqubit::norm_measure(&src),
                "norm_measure_dst": fourqubit::norm_measure(&dst),
            }))
        }
        FourQubitCommand::Regions { alpha, grid } => {
            let alpha = gamma_from_flags(&alpha, "alpha")?;
            let regions = fourqubit::accessible_region(&alpha, grid)?;
            let norm_extremes = |set: &[GammaVector]| -> Value {
                if set.is_empty() {
                    return json!(null);
                }
                let min = set
                    .iter()
                    .min_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
                    .unwrap();
                let max = set
                    .iter()
                    .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
                    .unwrap();
                json!({
                    "count": set.len(),
                    "min_norm_point": min.components(),
                    "max_norm_point": max.components(),
                })
            };
            Ok(json!({
                "grid": grid,
                "K_plus": norm_extremes(&regions.k_plus),
                "K_minus": norm_extremes(&regions.k_minus),
                "min_gap": regions.min_gap,
            }))
        }
        FourQubitCommand::Witness { alpha, grid } => {
            let alpha_vec = gamma_from_flags(&alpha, "alpha")?;
            let witness = fourqubit::no_intermediate_witness(&alpha_vec, grid)?;
            Ok(json!({
                "alpha": alpha_vec.components(),
                "grid": grid,
                "xi_plus": witness.xi_plus.components(),
                "xi_minus": witness.xi_minus.components(),
                "feasible": witness.certificate.pair_feasible,
                "certificate_checked": witness.certificate.candidates_checked,
                "violations": witness.certificate.violations,
                "note": witness.certificate.sep_equals_locc_note,
            }))
        }
    }
}

fn run_suite(command: SuiteCommand) -> Result<Value, CliError> {
    match command {
        SuiteCommand::Acceptance { seed, only } => {
            let outcomes = match only {
                Some(id) => {
                    if !(1..=acceptance::CRITERIA).contains(&id) {
                        return Err(CliError::Invalid(format!(
                            "criterion id must lie in 1..={}",
                            acceptance::CRITERIA
                        )));
                    }
                    vec![acceptance::run(id, seed)]
                }
                None => acceptance::run_all(seed),
            };
            for outcome in &outcomes {
                eprintln!("{}", outcome.line());
            }
            let all_passed = outcomes.iter().all(|o| o.passed);
            let doc = json!({
                "seed": seed,
                "all_passed": all_passed,
                "criteria": outcomes,
            });
            if all_passed {
                Ok(doc)
            } else {
                let text = format::to_json_string(&doc);
                println!("{text}");
                Err(CliError::SuiteFailed)
            }
        }
    }
}
