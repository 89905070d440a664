use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use super::nested::{flatten, nest};
use super::{CorrelationError, Scenario};
use crate::EXACT_TOL;

/// A conditional distribution `p(outcomes | inputs)`.
///
/// Construction only checks the table shape; numeric validity is reported by
/// [`validate_behavior`] so that invalid tables can still be inspected.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    scenario: Scenario,
    table: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonFinite {
        joint_input: usize,
        joint_output: usize,
        value: f64,
    },
    Negative {
        joint_input: usize,
        joint_output: usize,
        value: f64,
    },
    NotNormalized {
        joint_input: usize,
        sum: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            match v {
                Violation::NonFinite {
                    joint_input,
                    joint_output,
                    value,
                } => write!(f, "cell ({joint_input},{joint_output}) is {value}")?,
                Violation::Negative {
                    joint_input,
                    joint_output,
                    value,
                } => write!(f, "cell ({joint_input},{joint_output}) = {value} < 0")?,
                Violation::NotNormalized { joint_input, sum } => {
                    write!(f, "input {joint_input} sums to {sum}")?
                }
            }
        }
        Ok(())
    }
}

/// Checks nonnegativity and per-input normalisation of a raw table at 1e-12.
///
/// A shape mismatch is a structural error, never a listed violation.
pub fn validate_table(
    scenario: &Scenario,
    table: &[f64],
) -> Result<ValidationReport, CorrelationError> {
    if table.len() != scenario.n_cells() {
        return Err(CorrelationError::Structural(format!(
            "table has {} cells, scenario needs {}",
            table.len(),
            scenario.n_cells()
        )));
    }
    let k = scenario.n_joint_outputs();
    let mut violations = Vec::new();
    for (x, row) in table.chunks_exact(k).enumerate() {
        for (o, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                violations.push(Violation::NonFinite {
                    joint_input: x,
                    joint_output: o,
                    value: v,
                });
            } else if v < 0.0 {
                violations.push(Violation::Negative {
                    joint_input: x,
                    joint_output: o,
                    value: v,
                });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs().is_nan() || (sum - 1.0).abs() > EXACT_TOL {
            violations.push(Violation::NotNormalized {
                joint_input: x,
                sum,
            });
        }
    }
    Ok(ValidationReport { violations })
}

pub fn validate_behavior(b: &Behavior) -> ValidationReport {
    validate_table(&b.scenario, &b.table).expect("Behavior shape is checked at construction")
}

impl Behavior {
    /// Wraps a flat table; fails only on a shape mismatch.
    pub fn new(scenario: Scenario, table: Vec<f64>) -> Result<Self, CorrelationError> {
        validate_table(&scenario, &table)?;
        Ok(Self { scenario, table })
    }

    /// Like [`Behavior::new`] but also rejects numeric violations.
    pub fn checked(scenario: Scenario, table: Vec<f64>) -> Result<Self, CorrelationError> {
        let report = validate_table(&scenario, &table)?;
        if !report.is_empty() {
            return Err(CorrelationError::InvalidBehavior(report));
        }
        Ok(Self { scenario, table })
    }

    /// Builds a table cell by cell from `f(inputs, outputs)`.
    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(&[usize], &[usize]) -> f64) -> Self {
        let mut table = Vec::with_capacity(scenario.n_cells());
        for x in 0..scenario.n_joint_inputs() {
            let xs = scenario.decode_inputs(x);
            for o in 0..scenario.n_joint_outputs() {
                table.push(f(&xs, &scenario.decode_outputs(o)));
            }
        }
        Self { scenario, table }
    }

    /// Every outcome equally likely for every input.
    pub fn uniform(scenario: Scenario) -> Self {
        let p = 1.0 / scenario.n_joint_outputs() as f64;
        let table = vec![p; scenario.n_cells()];
        Self { scenario, table }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn validate(&self) -> ValidationReport {
        validate_behavior(self)
    }

    /// `p(outputs | inputs)`.
    pub fn prob(&self, inputs: &[usize], outputs: &[usize]) -> f64 {
        let s = &self.scenario;
        self.table[s.cell(s.joint_input(inputs), s.joint_output(outputs))]
    }

    /// The conditional distribution over joint outcomes for one joint input.
    pub fn row(&self, joint_input: usize) -> &[f64] {
        let k = self.scenario.n_joint_outputs();
        &self.table[joint_input * k..(joint_input + 1) * k]
    }

    /// `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, alpha: f64, other: &Behavior) -> Result<Behavior, CorrelationError> {
        if self.scenario != other.scenario {
            return Err(CorrelationError::Structural(
                "mixing behaviors of different scenarios".into(),
            ));
        }
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
            .collect();
        Ok(Behavior {
            scenario: self.scenario.clone(),
            table,
        })
    }

    /// Marginal over the parties listed in `keep` (in the given order), as a
    /// function of all joint inputs: `[joint_input][joint outcome of keep]`.
    fn marginal(&self, keep: &[usize]) -> (usize, Vec<f64>) {
        let s = &self.scenario;
        let width: usize = keep.iter().map(|&p| s.outputs()[p]).product();
        let mut out = vec![0.0; s.n_joint_inputs() * width];
        for o in 0..s.n_joint_outputs() {
            let os = s.decode_outputs(o);
            let idx = keep.iter().fold(0, |acc, &p| acc * s.outputs()[p] + os[p]);
            for x in 0..s.n_joint_inputs() {
                out[x * width + idx] += self.table[s.cell(x, o)];
            }
        }
        (width, out)
    }

    /// Applies the outcome permutation `perm` to `party`'s outcomes whenever
    /// its input equals `input`.
    pub fn relabel_outcomes(
        &self,
        party: usize,
        input: usize,
        perm: &[usize],
    ) -> Result<Behavior, CorrelationError> {
        check_perm(&self.scenario, party, perm, self.scenario.outputs())?;
        let s = &self.scenario;
        let mut table = vec![0.0; self.table.len()];
        for x in 0..s.n_joint_inputs() {
            let xs = s.decode_inputs(x);
            for o in 0..s.n_joint_outputs() {
                let mut os = s.decode_outputs(o);
                if xs[party] == input {
                    os[party] = perm[os[party]];
                }
                table[s.cell(x, s.joint_output(&os))] = self.table[s.cell(x, o)];
            }
        }
        Ok(Behavior {
            scenario: s.clone(),
            table,
        })
    }

    /// Renames `party`'s input `i` to `perm[i]`.
    pub fn relabel_inputs(
        &self,
        party: usize,
        perm: &[usize],
    ) -> Result<Behavior, CorrelationError> {
        check_perm(&self.scenario, party, perm, self.scenario.inputs())?;
        let s = &self.scenario;
        let k = s.n_joint_outputs();
        let mut table = vec![0.0; self.table.len()];
        for x in 0..s.n_joint_inputs() {
            let mut xs = s.decode_inputs(x);
            xs[party] = perm[xs[party]];
            let nx = s.joint_input(&xs);
            table[nx * k..(nx + 1) * k].copy_from_slice(self.row(x));
        }
        Ok(Behavior {
            scenario: s.clone(),
            table,
        })
    }

    /// Conditions on every flagged party producing a real outcome and drops ⊥.
    ///
    /// Returns the post-selected behavior and, per joint input, the probability
    /// that the round survived. Inputs with zero survival probability have no
    /// conditional distribution and make this fail.
    pub fn post_select(&self) -> Result<(Behavior, Vec<f64>), CorrelationError> {
        let s = &self.scenario;
        let target = s.without_bottom();
        let mut table = vec![0.0; target.n_cells()];
        let mut kept = vec![0.0; s.n_joint_inputs()];
        for o in 0..s.n_joint_outputs() {
            let os = s.decode_outputs(o);
            if os
                .iter()
                .enumerate()
                .any(|(p, &v)| s.bottom_outcome(p) == Some(v))
            {
                continue;
            }
            let to = target.joint_output(&os);
            for x in 0..s.n_joint_inputs() {
                let v = self.table[s.cell(x, o)];
                table[target.cell(x, to)] += v;
                kept[x] += v;
            }
        }
        let k = target.n_joint_outputs();
        for (x, &w) in kept.iter().enumerate() {
            if w <= 0.0 {
                return Err(CorrelationError::Estimation(format!(
                    "joint input {x} never survives post-selection"
                )));
            }
            table[x * k..(x + 1) * k].iter_mut().for_each(|v| *v /= w);
        }
        Ok((
            Behavior {
                scenario: target,
                table,
            },
            kept,
        ))
    }

    /// Embeds into the scenario with ⊥ added to every party; ⊥ has probability 0.
    pub fn with_bottom_added(&self) -> Behavior {
        let target = self.scenario.with_bottom_added();
        let mut table = vec![0.0; target.n_cells()];
        for x in 0..self.scenario.n_joint_inputs() {
            for o in 0..self.scenario.n_joint_outputs() {
                let os = self.scenario.decode_outputs(o);
                table[target.cell(x, target.joint_output(&os))] =
                    self.table[self.scenario.cell(x, o)];
            }
        }
        Behavior {
            scenario: target,
            table,
        }
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::json!({ "scenario": self.scenario, "table": nest(&self.dims(), &self.table) })
    }

    pub fn from_json_value(v: &Value) -> Result<Self, CorrelationError> {
        let scenario: Scenario = serde_json::from_value(
            v.get("scenario")
                .cloned()
                .ok_or_else(|| CorrelationError::Parse("missing \"scenario\"".into()))?,
        )
        .map_err(|e| CorrelationError::Parse(e.to_string()))?;
        let dims = table_dims(&scenario);
        let table = v
            .get("table")
            .ok_or_else(|| CorrelationError::Parse("missing \"table\"".into()))
            .and_then(|t| flatten(&dims, t).map_err(CorrelationError::Structural))?;
        Behavior::new(scenario, table)
    }

    fn dims(&self) -> Vec<usize> {
        table_dims(&self.scenario)
    }
}

/// Nested-array dimensions: every party's inputs, then every party's outputs.
pub(crate) fn table_dims(s: &Scenario) -> Vec<usize> {
    s.inputs().iter().chain(s.outputs()).copied().collect()
}

fn check_perm(
    s: &Scenario,
    party: usize,
    perm: &[usize],
    radix: &[usize],
) -> Result<(), CorrelationError> {
    if party >= s.parties() {
        return Err(CorrelationError::Structural(format!("no party {party}")));
    }
    let n = radix[party];
    let mut seen = vec![false; n];
    if perm.len() != n
        || perm
            .iter()
            .any(|&i| i >= n || std::mem::replace(&mut seen[i], true))
    {
        return Err(CorrelationError::Structural(format!(
            "{perm:?} is not a permutation of 0..{n}"
        )));
    }
    Ok(())
}

impl Serialize for Behavior {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        self.to_json_value().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Behavior {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(de)?;
        Behavior::from_json_value(&v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetDeviation {
    /// Parties whose joint marginal was examined.
    pub parties: Vec<usize>,
    /// Largest change of that marginal when only the other parties' inputs vary.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoSignalingReport {
    pub tol: f64,
    /// One entry per nonempty proper subset of parties, singletons first.
    pub subsets: Vec<SubsetDeviation>,
    /// `per_party[p]`: deviation of party `p`'s own marginal.
    pub per_party: Vec<f64>,
    pub max_deviation: f64,
    pub passes: bool,
}

/// Measures how much any group's marginal depends on the other parties' inputs.
pub fn no_signaling_check(b: &Behavior, tol: f64) -> Result<NoSignalingReport, CorrelationError> {
    let report = b.validate();
    if !report.is_empty() {
        return Err(CorrelationError::InvalidBehavior(report));
    }
    let s = b.scenario();
    let n = s.parties();
    let mut masks: Vec<u32> = (1..(1u32 << n) - 1).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mut subsets = Vec::with_capacity(masks.len());
    for mask in masks {
        let keep: Vec<usize> = (0..n).filter(|p| mask >> p & 1 == 1).collect();
        subsets.push(SubsetDeviation {
            max_deviation: subset_deviation(b, &keep),
            parties: keep,
        });
    }
    let per_party = (0..n)
        .map(|p| {
            subsets
                .iter()
                .find(|d| d.parties == [p])
                .map_or(0.0, |d| d.max_deviation)
        })
        .collect();
    let max_deviation = subsets.iter().map(|d| d.max_deviation).fold(0.0, f64::max);
    Ok(NoSignalingReport {
        tol,
        subsets,
        per_party,
        max_deviation,
        passes: max_deviation <= tol,
    })
}

fn subset_deviation(b: &Behavior, keep: &[usize]) -> f64 {
    let s = b.scenario();
    let (width, marg) = b.marginal(keep);
    let groups: usize = keep.iter().map(|&p| s.inputs()[p]).product();
    let mut lo = vec![f64::INFINITY; groups * width];
    let mut hi = vec![f64::NEG_INFINITY; groups * width];
    for x in 0..s.n_joint_inputs() {
        let xs = s.decode_inputs(x);
        let g = keep.iter().fold(0, |acc, &p| acc * s.inputs()[p] + xs[p]);
        for i in 0..width {
            let v = marg[x * width + i];
            lo[g * width + i] = lo[g * width + i].min(v);
            hi[g * width + i] = hi[g * width + i].max(v);
        }
    }
    lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signaling_alice_copies_y() -> Behavior {
        Behavior::from_fn(Scenario::chsh(), |x, o| {
            if o[0] == x[1] && o[1] == 0 {
                1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn uniform_is_valid() {
        assert!(Behavior::uniform(Scenario::chsh()).validate().is_empty());
    }

    #[test]
    fn negative_cell_is_listed() {
        let mut t = vec![0.25; 16];
        t[0] = -0.01;
        t[1] = 0.51;
        let b = Behavior::new(Scenario::chsh(), t).unwrap();
        let r = b.validate();
        assert_eq!(
            r.violations,
            vec![Violation::Negative {
                joint_input: 0,
                joint_output: 0,
                value: -0.01
            }]
        );
        assert!(Behavior::checked(Scenario::chsh(), b.table().to_vec()).is_err());
    }

    #[test]
    fn normalisation_violation_listed() {
        let mut t = vec![0.25; 16];
        t[5] = 0.26;
        let r = validate_table(&Scenario::chsh(), &t).unwrap();
        assert!(matches!(
            r.violations[..],
            [Violation::NotNormalized { joint_input: 1, .. }]
        ));
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let err = Behavior::new(Scenario::chsh(), vec![0.25; 15]).unwrap_err();
        assert!(matches!(err, CorrelationError::Structural(_)));
    }

    #[test]
    fn maximal_signaling_detected() {
        let r = no_signaling_check(&signaling_alice_copies_y(), 1e-12).unwrap();
        assert!(!r.passes);
        assert_eq!(r.per_party[0], 1.0);
        assert_eq!(r.per_party[1], 0.0);
        assert_eq!(r.max_deviation, 1.0);
    }

    #[test]
    fn invalid_behavior_rejected_by_no_signaling() {
        let b = Behavior::new(Scenario::chsh(), vec![0.0; 16]).unwrap();
        assert!(matches!(
            no_signaling_check(&b, 1e-12),
            Err(CorrelationError::InvalidBehavior(_))
        ));
    }

    #[test]
    fn three_party_subsets() {
        let s = Scenario::uniform(3, 2, 2).unwrap();
        // Bob and Charlie jointly copy Alice's input into their parity.
        let b = Behavior::from_fn(s, |x, o| {
            if (o[1] ^ o[2]) == x[0] && o[0] == 0 {
                0.5
            } else {
                0.0
            }
        });
        let r = no_signaling_check(&b, 1e-12).unwrap();
        assert_eq!(r.subsets.len(), 6);
        assert!(r.per_party.iter().all(|&d| d == 0.0));
        let bc = r.subsets.iter().find(|d| d.parties == [1, 2]).unwrap();
        assert_eq!(bc.max_deviation, 0.5);
        assert!(!r.passes);
    }

    #[test]
    fn json_round_trip_and_layout() {
        let b = Behavior::from_fn(Scenario::chsh(), |x, o| {
            if (o[0] ^ o[1]) == (x[0] & x[1]) {
                0.5
            } else {
                0.0
            }
        });
        let v = b.to_json_value();
        // table[x][y][a][b]
        assert_eq!(v["table"][1][1][0][1], 0.5);
        assert_eq!(v["table"][1][1][0][0], 0.0);
        let text = crate::format::to_json(&b, false).unwrap();
        let back: Behavior = serde_json::from_str(&text).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn malformed_table_is_structural() {
        let v = serde_json::json!({"scenario": Scenario::chsh(), "table": [[[[0.5,0.5]]]]});
        assert!(matches!(
            Behavior::from_json_value(&v),
            Err(CorrelationError::Structural(_))
        ));
    }

    #[test]
    fn post_selection_renormalises() {
        let s = Scenario::with_bottom(vec![1, 1], vec![3, 2], vec![true, false]).unwrap();
        let b = Behavior::new(s, vec![0.25, 0.25, 0.0, 0.0, 0.5, 0.0]).unwrap();
        let (ps, kept) = b.post_select().unwrap();
        assert_eq!(kept, vec![0.5]);
        assert_eq!(ps.table(), &[0.5, 0.5, 0.0, 0.0]);
        assert_eq!(ps.with_bottom_added().post_select().unwrap().0, ps);
    }
}
