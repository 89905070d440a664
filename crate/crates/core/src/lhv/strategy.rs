use serde::Serialize;

use super::{LhvError, DEFAULT_STRATEGY_CAP};
use crate::correlations::{Behavior, Scenario};
use crate::EXACT_TOL;

/// One deterministic λ: every party's output as a function of its own input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    scenario: Scenario,
    /// `responses[party][input]`
    responses: Vec<Vec<usize>>,
}

impl DeterministicStrategy {
    pub fn new(scenario: Scenario, responses: Vec<Vec<usize>>) -> Result<Self, LhvError> {
        if responses.len() != scenario.parties() {
            return Err(LhvError::InvalidModel(format!(
                "{} response tables for {} parties",
                responses.len(),
                scenario.parties()
            )));
        }
        for (p, r) in responses.iter().enumerate() {
            if r.len() != scenario.inputs()[p] {
                return Err(LhvError::InvalidModel(format!(
                    "party {p}: response table not total"
                )));
            }
            if let Some(o) = r.iter().find(|&&o| o >= scenario.outputs()[p]) {
                return Err(LhvError::InvalidModel(format!(
                    "party {p}: output {o} out of range"
                )));
            }
        }
        Ok(Self {
            scenario,
            responses,
        })
    }

    /// Every party answers `output` to every input.
    pub fn constant(scenario: Scenario, output: usize) -> Result<Self, LhvError> {
        let responses = scenario.inputs().iter().map(|&m| vec![output; m]).collect();
        Self::new(scenario, responses)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn responses(&self) -> &[Vec<usize>] {
        &self.responses
    }

    pub fn respond(&self, party: usize, input: usize) -> usize {
        self.responses[party][input]
    }

    /// Joint outcome index produced for a joint input index.
    pub fn joint_output_for(&self, joint_input: usize) -> usize {
        let s = &self.scenario;
        let xs = s.decode_inputs(joint_input);
        let os: Vec<usize> = xs
            .iter()
            .enumerate()
            .map(|(p, &x)| self.responses[p][x])
            .collect();
        s.joint_output(&os)
    }

    /// The 0/1 behavior of this strategy.
    pub fn behavior(&self) -> Behavior {
        let s = &self.scenario;
        let mut table = vec![0.0; s.n_cells()];
        for x in 0..s.n_joint_inputs() {
            table[s.cell(x, self.joint_output_for(x))] = 1.0;
        }
        Behavior::new(s.clone(), table).expect("shape matches scenario")
    }
}

impl Serialize for DeterministicStrategy {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        self.responses.serialize(ser)
    }
}

/// Number of deterministic strategies, `prod_p outputs_p ^ inputs_p`, or `None`
/// if it does not fit in a `u128`.
pub fn count_deterministic(s: &Scenario) -> Option<u128> {
    s.inputs()
        .iter()
        .zip(s.outputs())
        .try_fold(1u128, |acc, (&m, &k)| {
            let per_party = (k as u128).checked_pow(u32::try_from(m).ok()?)?;
            acc.checked_mul(per_party)
        })
}

pub(crate) fn check_cap(s: &Scenario, cap: u128) -> Result<usize, LhvError> {
    match count_deterministic(s) {
        Some(n) if n <= cap => Ok(n as usize),
        Some(n) => Err(LhvError::CapExceeded {
            count: n.to_string(),
            cap,
        }),
        None => Err(LhvError::CapExceeded {
            count: "more than 2^128".into(),
            cap,
        }),
    }
}

/// All deterministic strategies in lexicographic order of the concatenated
/// response tables (party 0 first, each party's inputs in order).
pub fn enumerate_deterministic(s: &Scenario) -> Result<Vec<DeterministicStrategy>, LhvError> {
    enumerate_with_cap(s, DEFAULT_STRATEGY_CAP)
}

pub(crate) fn enumerate_with_cap(
    s: &Scenario,
    cap: u128,
) -> Result<Vec<DeterministicStrategy>, LhvError> {
    let total = check_cap(s, cap)?;
    let radix: Vec<usize> = s
        .inputs()
        .iter()
        .zip(s.outputs())
        .flat_map(|(&m, &k)| std::iter::repeat_n(k, m))
        .collect();
    let mut digits = vec![0usize; radix.len()];
    let mut out = Vec::with_capacity(total);
    for _ in 0..total {
        let mut responses = Vec::with_capacity(s.parties());
        let mut at = 0;
        for &m in s.inputs() {
            responses.push(digits[at..at + m].to_vec());
            at += m;
        }
        out.push(DeterministicStrategy {
            scenario: s.clone(),
            responses,
        });
        // increment, last digit fastest
        for i in (0..digits.len()).rev() {
            digits[i] += 1;
            if digits[i] < radix[i] {
                break;
            }
            digits[i] = 0;
        }
    }
    Ok(out)
}

/// A probability mixture of deterministic strategies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalModel {
    strategies: Vec<DeterministicStrategy>,
    weights: Vec<f64>,
}

impl LocalModel {
    pub fn new(
        strategies: Vec<DeterministicStrategy>,
        weights: Vec<f64>,
    ) -> Result<Self, LhvError> {
        if strategies.is_empty() || strategies.len() != weights.len() {
            return Err(LhvError::InvalidModel(format!(
                "{} strategies with {} weights",
                strategies.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(LhvError::InvalidModel(format!(
                "weight {w} is not a probability"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > EXACT_TOL {
            return Err(LhvError::InvalidModel(format!("weights sum to {sum}")));
        }
        let s = strategies[0].scenario();
        if strategies.iter().any(|st| st.scenario() != s) {
            return Err(LhvError::InvalidModel(
                "strategies from different scenarios".into(),
            ));
        }
        Ok(Self {
            strategies,
            weights,
        })
    }

    pub fn point(strategy: DeterministicStrategy) -> Self {
        Self {
            strategies: vec![strategy],
            weights: vec![1.0],
        }
    }

    /// Equal weights over `strategies`.
    pub fn uniform(strategies: Vec<DeterministicStrategy>) -> Result<Self, LhvError> {
        let w = 1.0 / strategies.len() as f64;
        let weights = vec![w; strategies.len()];
        Self::new(strategies, weights)
    }

    pub fn scenario(&self) -> &Scenario {
        self.strategies[0].scenario()
    }

    pub fn strategies(&self) -> &[DeterministicStrategy] {
        &self.strategies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn behavior(&self) -> Behavior {
        behavior_of(self)
    }
}

/// `p(o | x) = sum of the weights of the strategies answering `o` to `x``.
pub fn behavior_of(m: &LocalModel) -> Behavior {
    let s = m.scenario();
    let mut table = vec![0.0; s.n_cells()];
    for (st, &w) in m.strategies.iter().zip(&m.weights) {
        for x in 0..s.n_joint_inputs() {
            table[s.cell(x, st.joint_output_for(x))] += w;
        }
    }
    Behavior::new(s.clone(), table).expect("shape matches scenario")
}
