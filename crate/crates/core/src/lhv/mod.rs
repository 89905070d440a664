//! Local-hidden-variable models: deterministic strategies, their mixtures, Bell
//! functionals and local-polytope membership.

mod functional;
mod membership;
mod simplex;
mod strategy;

use thiserror::Error;

use crate::correlations::CorrelationError;

pub use functional::{
    bell_value, local_max, local_max_with_cap, BellFunctional, Certificate, LocalMax,
};
pub use membership::{is_local, is_local_with_cap, Membership};
pub use strategy::{
    behavior_of, count_deterministic, enumerate_deterministic, DeterministicStrategy, LocalModel,
};

/// Largest number of deterministic strategies enumerated by default.
pub const DEFAULT_STRATEGY_CAP: u128 = 1_000_000;

#[derive(Debug, Error)]
pub enum LhvError {
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    /// The scenario has more deterministic strategies than the cap allows.
    #[error("desk-scale exceeded: {count} deterministic strategies, cap is {cap}")]
    CapExceeded { count: String, cap: u128 },
    #[error("invalid local model: {0}")]
    InvalidModel(String),
    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),
    /// The solver could not reach a trustworthy answer. Not a verdict of nonlocality.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}
