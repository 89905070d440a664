//! Seeded Monte Carlo experiments.
//!
//! Round `i` of a run with master seed `s` draws all of its randomness (inputs
//! and outcomes) from ChaCha8 stream `i` of the generator seeded with `s`
//! (`ChaCha8Rng::seed_from_u64(s)` followed by `set_stream(i)`). Rounds are
//! therefore independent of execution order, and parallel and sequential runs
//! produce identical tallies.

mod detection;
mod ghz;
mod run;
mod source;

use thiserror::Error;

use crate::correlations::CorrelationError;
use crate::lhv::LhvError;
use crate::nonlocal_box::BoxError;
use crate::quantum::QuantumError;
use crate::relativity::RelativityError;

pub use detection::{detection_loophole_run, DetectionModel, DetectionReport, Efficiency};
pub use ghz::{
    ghz_signaling, ghz_vcausal_run, ghz_vcausal_run_with, GhzArmReport, GhzSignalingReport,
    HiddenInfluenceResponse, PureCommunication, VCausalGhzConfig,
};
pub use run::{
    estimate_s, loophole_audit, round_rng, run, run_with, ExperimentConfig, InputDistribution,
    LoopholeReport, Parallelism, RunOutput, RunReport, SEstimate,
};
pub use source::Source;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("loophole audit needs event geometry")]
    MissingGeometry,
    #[error("Bob and Charlie are not isolated: {0}")]
    IsolationViolated(String),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Lhv(#[from] LhvError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Relativity(#[from] RelativityError),
    #[error(transparent)]
    Box(#[from] BoxError),
}
