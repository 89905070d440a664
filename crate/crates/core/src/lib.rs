//! Bell nonlocality toolkit.
//!
//! The crate is organised around the conditional distribution `p(outcomes | inputs)`
//! of a multi-party experiment (a [`Behavior`]):
//!
//!   * [`correlations`]: scenarios, behaviors, finite-sample tallies and the
//!     statistical checks (normalisation, no-signaling, mutual information).
//!   * [`lhv`]: deterministic strategies, local mixtures, Bell functionals, the
//!     local bound and local-polytope membership with dual certificates.
//!   * [`quantum`]: a small dense state-vector engine with real-plane projective
//!     qubit measurements.
//!   * [`nonlocal_box`]: the PR box as a table and as a single-use sampled resource.
//!   * [`relativity`]: event geometry, boosts and finite-speed hidden-influence models.
//!   * [`harness`]: seeded Monte Carlo experiments tying the above together.

#![forbid(unsafe_code)]

pub mod correlations;
pub mod format;
pub mod harness;
pub mod lhv;
pub mod nonlocal_box;
pub mod quantum;
pub mod relativity;

pub use correlations::{
    Behavior, CorrelationError, Estimate, JointDistribution, Scenario, TallyTable, ValidationReport,
};
pub use harness::{DetectionModel, ExperimentConfig, HarnessError, Source, VCausalGhzConfig};
pub use lhv::{BellFunctional, DeterministicStrategy, LhvError, LocalModel, Membership};
pub use quantum::{QuantumSetup, QubitMeasurement, StateVector};
pub use relativity::{Frame, SpacetimeEvent, VCausalModel};

/// Tolerance for exact (rational) constructions: normalisation, exact tables.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for floating-point pipelines such as Born-rule evaluation.
pub const FLOAT_TOL: f64 = 1e-9;
