//! Scenarios, behaviors and finite-sample tallies.
//!
//! Joint indices are row-major over parties in party order: for inputs
//! `(x_0, .., x_{n-1})` the joint index is `((x_0 * m_1 + x_1) * m_2 + ..)`, and
//! the same rule applies to joint outcomes. A behavior's flat table is indexed
//! `joint_input * n_joint_outputs + joint_output`, which is also the order of
//! the nested JSON arrays (inputs outer, outcomes inner).

mod behavior;
mod info;
mod nested;
mod scenario;
mod tally;

use thiserror::Error;

pub use behavior::{
    no_signaling_check, validate_behavior, validate_table, Behavior, NoSignalingReport,
    SubsetDeviation, ValidationReport, Violation,
};
pub use info::{mutual_information, JointDistribution};
pub use scenario::Scenario;
pub use tally::{estimate_behavior, Estimate, PostSelection, TallyTable};

#[derive(Debug, Error)]
pub enum CorrelationError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    /// Shapes do not match the scenario. Distinct from numeric violations.
    #[error("structural mismatch: {0}")]
    Structural(String),
    #[error("behavior violates {} constraint(s): {}", .0.violations.len(), .0)]
    InvalidBehavior(ValidationReport),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Nested JSON arrays for a per-cell table of `s` (inputs outer, outcomes inner).
pub(crate) fn nest_table(s: &Scenario, flat: &[f64]) -> serde_json::Value {
    nested::nest(&behavior::table_dims(s), flat)
}
