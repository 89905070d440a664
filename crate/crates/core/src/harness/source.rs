use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{DetectionModel, HarnessError, VCausalGhzConfig};
use crate::correlations::{Behavior, Scenario};
use crate::lhv::LocalModel;
use crate::nonlocal_box;
use crate::quantum::QuantumSetup;

/// What produces the outcomes of an experiment.
#[derive(Debug, Clone)]
pub enum Source {
    /// Sample directly from a behavior table.
    Behavior(Behavior),
    /// Born-rule behavior of a quantum setup.
    Quantum(QuantumSetup),
    /// The PR box, queried once per round.
    PrBox,
    /// Draw a deterministic strategy by weight, then answer with it.
    Local(LocalModel),
    /// Local model that answers ⊥ whenever the input differs from its plan.
    Detection(DetectionModel),
    /// GHZ experiment under a pure hidden-communication model. Alice's input
    /// 1 means "measure"; input 0 leaves her outcome at ⊥.
    VCausalGhz(VCausalGhzConfig),
}

impl Source {
    pub fn scenario(&self) -> Scenario {
        match self {
            Source::Behavior(b) => b.scenario().clone(),
            Source::Quantum(q) => q.scenario(),
            Source::PrBox => Scenario::chsh(),
            Source::Local(m) => m.scenario().clone(),
            Source::Detection(_) => DetectionModel::scenario(),
            Source::VCausalGhz(_) => VCausalGhzConfig::scenario(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Source::Behavior(_) => "behavior",
            Source::Quantum(_) => "quantum",
            Source::PrBox => "pr_box",
            Source::Local(_) => "local",
            Source::Detection(_) => "detection_model",
            Source::VCausalGhz(_) => "vcausal_ghz",
        }
    }

    pub fn describe(&self) -> Value {
        let detail = match self {
            Source::Behavior(b) => b.to_json_value(),
            Source::Quantum(q) => json!({
                "amplitudes": q.state().amplitudes().iter().map(|a| [a.re, a.im]).collect::<Vec<_>>(),
                "settings": q.settings().iter().map(|s| s.iter().map(|m| m.angle).collect::<Vec<_>>()).collect::<Vec<_>>(),
            }),
            Source::PrBox => Value::Null,
            Source::Local(m) => serde_json::to_value(m).unwrap_or(Value::Null),
            Source::Detection(_) => {
                json!({ "rule": "output planned bit iff input matches planned input, else ⊥" })
            }
            Source::VCausalGhz(c) => serde_json::to_value(c).unwrap_or(Value::Null),
        };
        json!({ "kind": self.kind(), "detail": detail })
    }

    pub(crate) fn prepare(&self) -> Result<Prepared, HarnessError> {
        Ok(match self {
            Source::Behavior(b) => Prepared::table(b)?,
            Source::Quantum(q) => Prepared::table(&q.behavior())?,
            Source::PrBox => Prepared::PrBox,
            Source::Local(m) => {
                let mut acc = 0.0;
                let cdf = m
                    .weights()
                    .iter()
                    .map(|w| {
                        acc += w;
                        acc
                    })
                    .collect();
                Prepared::Local {
                    model: m.clone(),
                    cdf,
                }
            }
            Source::Detection(d) => Prepared::Detection(*d),
            Source::VCausalGhz(c) => {
                let reach = c.validate()?;
                Prepared::Ghz { reach }
            }
        })
    }
}

/// A source ready to answer rounds.
pub(crate) enum Prepared {
    Table { scenario: Scenario, cdf: Vec<f64> },
    PrBox,
    Local { model: LocalModel, cdf: Vec<f64> },
    Detection(DetectionModel),
    Ghz { reach: [bool; 2] },
}

/// Smallest index whose cumulative weight exceeds `u`; the last index absorbs
/// rounding shortfall.
pub(crate) fn pick(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

impl Prepared {
    fn table(b: &Behavior) -> Result<Self, HarnessError> {
        let report = b.validate();
        if !report.is_empty() {
            return Err(crate::correlations::CorrelationError::InvalidBehavior(report).into());
        }
        let k = b.scenario().n_joint_outputs();
        let mut cdf = Vec::with_capacity(b.table().len());
        for row in b.table().chunks_exact(k) {
            let mut acc = 0.0;
            cdf.extend(row.iter().map(|p| {
                acc += p;
                acc
            }));
        }
        Ok(Prepared::Table {
            scenario: b.scenario().clone(),
            cdf,
        })
    }

    /// Joint outcome index for one round.
    pub(crate) fn sample(
        &self,
        scenario: &Scenario,
        inputs: &[usize],
        rng: &mut ChaCha8Rng,
    ) -> usize {
        match self {
            Prepared::Table { scenario: s, cdf } => {
                let k = s.n_joint_outputs();
                let x = s.joint_input(inputs);
                pick(&cdf[x * k..(x + 1) * k], rng.random::<f64>())
            }
            Prepared::PrBox => {
                let (a, b) = nonlocal_box::sample(inputs[0] as u8, inputs[1] as u8, rng)
                    .expect("binary inputs");
                scenario.joint_output(&[a as usize, b as usize])
            }
            Prepared::Local { model, cdf } => {
                let st = &model.strategies()[pick(cdf, rng.random::<f64>())];
                st.joint_output_for(scenario.joint_input(inputs))
            }
            Prepared::Detection(d) => {
                let o = d.respond(inputs[0], inputs[1], rng);
                scenario.joint_output(&o)
            }
            Prepared::Ghz { reach } => {
                let (a, b, c) = super::ghz::pure_round(inputs[0] == 1, *reach, rng);
                scenario.joint_output(&[a.map_or(2, usize::from), b as usize, c as usize])
            }
        }
    }
}
