//! entflow: optimal single-copy entanglement transformations.
//!
//! The crate computes optimal conversion probabilities between bipartite and
//! generic multipartite pure states, characterizes optimal intermediate states
//! and transformation paths, integrates path success probabilities with a
//! survival (hazard-rate) model, evaluates the interconversion metric, and
//! probes the nongeneric 4-qubit family that admits no intermediate state.
//!
//! Modules map one-to-one onto the subsystems:
//!
//! - [`spectra`]: small dense Hermitian eigensolver and tensor-spectral shortcuts
//! - [`bipartite`]: Schmidt vectors, the E_l monotones, majorization lattice
//! - [`protocols`]: explicit optimal-protocol constructors (ξ, ζ/η, χ^max, χ^min, paths)
//! - [`multipartite`]: (seed, local operator) states, E_x monotones, path optimality
//! - [`path`]: shared one-parameter state families
//! - [`survival`]: hazard integration, path probabilities, lengths, the metric
//! - [`fourqubit`]: the γ-vector family, LOCC feasibility, no-intermediate witness
//! - [`acceptance`]: the end-to-end verification suite driven by the CLI and tests

pub mod acceptance;
pub mod bipartite;
pub mod fourqubit;
pub mod multipartite;
pub mod path;
pub mod protocols;
pub mod sampling;
pub mod spectra;
pub mod survival;

pub use bipartite::SchmidtVector;
pub use multipartite::{GenericStateDescriptor, LocalPSDOperator, ProductState};
pub use path::PathSpec;
pub use spectra::{ComplexMatrix, HermitianPD};
pub use survival::{StateDescriptor, SurvivalReport};
