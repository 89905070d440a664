use std::sync::OnceLock;

use serde::{Serialize, Serializer};
use serde_json::Value;

use super::strategy::{check_cap, enumerate_with_cap};
use super::{DeterministicStrategy, LhvError, DEFAULT_STRATEGY_CAP};
use crate::correlations::{Behavior, CorrelationError, Scenario};
use crate::EXACT_TOL;

/// A linear form on behaviors: `sum over cells of coefficient * p(o|x)`.
///
/// The local bound is computed on first request and cached.
#[derive(Debug, Clone)]
pub struct BellFunctional {
    scenario: Scenario,
    coefficients: Vec<f64>,
    local_bound: OnceLock<f64>,
}

impl PartialEq for BellFunctional {
    fn eq(&self, other: &Self) -> bool {
        self.scenario == other.scenario && self.coefficients == other.coefficients
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalMax {
    pub value: f64,
    /// First optimal strategy in canonical order.
    pub argmax: DeterministicStrategy,
    /// Number of strategies within 1e-12 of the maximum.
    pub n_optimal: usize,
}

impl BellFunctional {
    pub fn new(scenario: Scenario, coefficients: Vec<f64>) -> Result<Self, LhvError> {
        if coefficients.len() != scenario.n_cells() {
            return Err(CorrelationError::Structural(format!(
                "{} coefficients for {} cells",
                coefficients.len(),
                scenario.n_cells()
            ))
            .into());
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(LhvError::InvalidModel("non-finite coefficient".into()));
        }
        Ok(Self {
            scenario,
            coefficients,
            local_bound: OnceLock::new(),
        })
    }

    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(&[usize], &[usize]) -> f64) -> Self {
        let mut coefficients = Vec::with_capacity(scenario.n_cells());
        for x in 0..scenario.n_joint_inputs() {
            let xs = scenario.decode_inputs(x);
            for o in 0..scenario.n_joint_outputs() {
                coefficients.push(f(&xs, &scenario.decode_outputs(o)));
            }
        }
        Self {
            scenario,
            coefficients,
            local_bound: OnceLock::new(),
        }
    }

    pub fn zero(scenario: Scenario) -> Self {
        let coefficients = vec![0.0; scenario.n_cells()];
        Self {
            scenario,
            coefficients,
            local_bound: OnceLock::new(),
        }
    }

    /// `S = p(a=b|0,0) + p(a=b|0,1) + p(a=b|1,0) + p(a≠b|1,1)`, local bound 3.
    pub fn chsh_s() -> Self {
        Self::chsh_variant(0, 0, 0)
    }

    /// Relabelled form of [`BellFunctional::chsh_s`]: one point for every
    /// round with `a ⊕ b = x·y ⊕ αx ⊕ βy ⊕ γ`. The eight choices of
    /// `(α, β, γ)` are all the CHSH facets of the binary bipartite local polytope.
    pub fn chsh_variant(alpha: usize, beta: usize, gamma: usize) -> Self {
        Self::from_fn(Scenario::chsh(), |x, o| {
            let target = (x[0] & x[1]) ^ (alpha & x[0]) ^ (beta & x[1]) ^ gamma;
            ((o[0] ^ o[1]) == target & 1) as u8 as f64
        })
    }

    /// CHSH-S lifted to a two-party scenario with at least two inputs and
    /// outputs per party: zero weight on every other cell.
    pub fn chsh_s_lifted(scenario: &Scenario) -> Result<Self, LhvError> {
        let fits = scenario.parties() == 2
            && scenario.inputs().iter().all(|&m| m >= 2)
            && scenario.outputs().iter().all(|&k| k >= 2);
        if !fits {
            return Err(LhvError::ScenarioMismatch(
                "CHSH needs two parties with at least two inputs and outputs".into(),
            ));
        }
        let base = Self::chsh_s();
        Ok(Self::from_fn(scenario.clone(), |x, o| {
            if x.iter().chain(o).all(|&v| v < 2) {
                base.coefficient(x, o)
            } else {
                0.0
            }
        }))
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, inputs: &[usize], outputs: &[usize]) -> f64 {
        let s = &self.scenario;
        self.coefficients[s.cell(s.joint_input(inputs), s.joint_output(outputs))]
    }

    /// Same form on the scenario with ⊥ added to every party, ⊥ cells weighted 0.
    pub fn with_bottom_added(&self) -> Self {
        let target = self.scenario.with_bottom_added();
        Self::from_fn(target.clone(), |x, o| {
            if o.iter()
                .enumerate()
                .any(|(p, &v)| target.bottom_outcome(p) == Some(v))
            {
                0.0
            } else {
                self.coefficient(x, o)
            }
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let coefficients = self.coefficients.iter().map(|c| c * factor).collect();
        Self {
            scenario: self.scenario.clone(),
            coefficients,
            local_bound: OnceLock::new(),
        }
    }

    pub fn relabel_outcomes(
        &self,
        party: usize,
        input: usize,
        perm: &[usize],
    ) -> Result<Self, LhvError> {
        let b = Behavior::new(self.scenario.clone(), self.coefficients.clone())?;
        let t = b.relabel_outcomes(party, input, perm)?;
        Self::new(self.scenario.clone(), t.table().to_vec())
    }

    pub fn relabel_inputs(&self, party: usize, perm: &[usize]) -> Result<Self, LhvError> {
        let b = Behavior::new(self.scenario.clone(), self.coefficients.clone())?;
        let t = b.relabel_inputs(party, perm)?;
        Self::new(self.scenario.clone(), t.table().to_vec())
    }

    pub fn value(&self, b: &Behavior) -> Result<f64, LhvError> {
        bell_value(b, self)
    }

    /// Value of a deterministic strategy.
    pub fn strategy_value(&self, st: &DeterministicStrategy) -> f64 {
        let s = &self.scenario;
        (0..s.n_joint_inputs())
            .map(|x| self.coefficients[s.cell(x, st.joint_output_for(x))])
            .sum()
    }

    /// Maximum over local models, with the default enumeration cap.
    pub fn local_bound(&self) -> Result<f64, LhvError> {
        if let Some(v) = self.local_bound.get() {
            return Ok(*v);
        }
        let v = local_max(self)?.value;
        Ok(*self.local_bound.get_or_init(|| v))
    }

    pub fn to_json_value(&self) -> Result<Value, LhvError> {
        Ok(serde_json::json!({
            "scenario": self.scenario,
            "coefficients": crate::correlations::nest_table(&self.scenario, &self.coefficients),
            "local_bound": self.local_bound()?,
        }))
    }

    /// Reads `{"scenario", "coefficients", "local_bound"?}`. A supplied local
    /// bound is ignored; the bound is always recomputed.
    pub fn from_json_value(v: &Value) -> Result<Self, LhvError> {
        let b = Behavior::from_json_value(&serde_json::json!({
            "scenario": v.get("scenario").cloned().unwrap_or(Value::Null),
            "table": v.get("coefficients").cloned()
                .ok_or_else(|| CorrelationError::Parse("missing \"coefficients\"".into()))?,
        }))?;
        Self::new(b.scenario().clone(), b.table().to_vec())
    }
}

impl Serialize for BellFunctional {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        self.to_json_value()
            .map_err(serde::ser::Error::custom)?
            .serialize(ser)
    }
}

/// `sum coefficient * cell`.
pub fn bell_value(b: &Behavior, f: &BellFunctional) -> Result<f64, LhvError> {
    if b.scenario() != f.scenario() {
        return Err(LhvError::ScenarioMismatch(format!(
            "{:?} vs {:?}",
            b.scenario(),
            f.scenario()
        )));
    }
    Ok(b.table()
        .iter()
        .zip(&f.coefficients)
        .map(|(p, c)| p * c)
        .sum())
}

/// Exact maximum over all deterministic strategies.
pub fn local_max(f: &BellFunctional) -> Result<LocalMax, LhvError> {
    local_max_with_cap(f, DEFAULT_STRATEGY_CAP)
}

pub fn local_max_with_cap(f: &BellFunctional, cap: u128) -> Result<LocalMax, LhvError> {
    check_cap(f.scenario(), cap)?;
    let strategies = enumerate_with_cap(f.scenario(), cap)?;
    let values: Vec<f64> = strategies.iter().map(|s| f.strategy_value(s)).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = values
        .iter()
        .position(|&v| v == best)
        .expect("nonempty enumeration");
    let n_optimal = values.iter().filter(|&&v| best - v <= EXACT_TOL).count();
    Ok(LocalMax {
        value: best,
        argmax: strategies[first].clone(),
        n_optimal,
    })
}

/// A functional separating a behavior from the local polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub functional: BellFunctional,
    /// `bell_value(behavior, functional)`.
    pub witnessed_value: f64,
    /// `local_max(functional)`.
    pub local_bound: f64,
    pub normalization: &'static str,
}

impl Certificate {
    pub fn gap(&self) -> f64 {
        self.witnessed_value - self.local_bound
    }

    pub fn to_json_value(&self) -> Result<Value, LhvError> {
        let mut v = self.functional.to_json_value()?;
        v["witnessed_value"] = Value::from(self.witnessed_value);
        v["normalization"] = Value::from(self.normalization);
        Ok(v)
    }
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        self.to_json_value()
            .map_err(serde::ser::Error::custom)?
            .serialize(ser)
    }
}
