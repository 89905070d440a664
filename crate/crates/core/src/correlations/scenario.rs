use serde::{Deserialize, Serialize};

use super::CorrelationError;

/// Parties with finite input and output alphabets.
///
/// A party flagged in `bottom` uses its last output value as the no-outcome
/// symbol ⊥; it is otherwise an ordinary outcome.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawScenario", into = "RawScenario")]
pub struct Scenario {
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    bottom: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct RawScenario {
    parties: usize,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    #[serde(default)]
    bottom: Option<Vec<bool>>,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = CorrelationError;

    fn try_from(raw: RawScenario) -> Result<Self, Self::Error> {
        if raw.inputs.len() != raw.parties {
            return Err(CorrelationError::InvalidScenario(format!(
                "{} parties but {} input cardinalities",
                raw.parties,
                raw.inputs.len()
            )));
        }
        let bottom = raw.bottom.unwrap_or_else(|| vec![false; raw.parties]);
        Scenario::with_bottom(raw.inputs, raw.outputs, bottom)
    }
}

impl From<Scenario> for RawScenario {
    fn from(s: Scenario) -> Self {
        RawScenario {
            parties: s.parties(),
            inputs: s.inputs,
            outputs: s.outputs,
            bottom: Some(s.bottom),
        }
    }
}

impl Scenario {
    pub fn new(inputs: Vec<usize>, outputs: Vec<usize>) -> Result<Self, CorrelationError> {
        let n = inputs.len();
        Self::with_bottom(inputs, outputs, vec![false; n])
    }

    pub fn with_bottom(
        inputs: Vec<usize>,
        outputs: Vec<usize>,
        bottom: Vec<bool>,
    ) -> Result<Self, CorrelationError> {
        let n = inputs.len();
        if n == 0 {
            return Err(CorrelationError::InvalidScenario(
                "at least one party required".into(),
            ));
        }
        if outputs.len() != n || bottom.len() != n {
            return Err(CorrelationError::InvalidScenario(format!(
                "per-party lists disagree: inputs {}, outputs {}, bottom {}",
                n,
                outputs.len(),
                bottom.len()
            )));
        }
        if inputs.iter().chain(&outputs).any(|&c| c == 0) {
            return Err(CorrelationError::InvalidScenario(
                "cardinalities must be >= 1".into(),
            ));
        }
        for (p, (&o, &b)) in outputs.iter().zip(&bottom).enumerate() {
            if b && o < 2 {
                return Err(CorrelationError::InvalidScenario(format!(
                    "party {p} flags ⊥ but has no room for a real outcome"
                )));
            }
        }
        let s = Scenario {
            inputs,
            outputs,
            bottom,
        };
        s.n_joint_inputs()
            .checked_mul(s.n_joint_outputs())
            .ok_or_else(|| CorrelationError::InvalidScenario("table size overflows".into()))?;
        Ok(s)
    }

    /// `n` parties with `m` inputs and `k` outputs each.
    pub fn uniform(
        parties: usize,
        inputs: usize,
        outputs: usize,
    ) -> Result<Self, CorrelationError> {
        Self::new(vec![inputs; parties], vec![outputs; parties])
    }

    /// Two parties, binary inputs, binary outputs.
    pub fn chsh() -> Self {
        Self::uniform(2, 2, 2).expect("static scenario")
    }

    pub fn parties(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn bottom(&self) -> &[bool] {
        &self.bottom
    }

    /// The ⊥ outcome of `party`, if it has one.
    pub fn bottom_outcome(&self, party: usize) -> Option<usize> {
        self.bottom[party].then(|| self.outputs[party] - 1)
    }

    pub fn has_bottom(&self) -> bool {
        self.bottom.iter().any(|&b| b)
    }

    pub fn n_joint_inputs(&self) -> usize {
        self.inputs.iter().product()
    }

    pub fn n_joint_outputs(&self) -> usize {
        self.outputs.iter().product()
    }

    pub fn n_cells(&self) -> usize {
        self.n_joint_inputs() * self.n_joint_outputs()
    }

    pub fn cell(&self, joint_input: usize, joint_output: usize) -> usize {
        joint_input * self.n_joint_outputs() + joint_output
    }

    pub fn joint_input(&self, inputs: &[usize]) -> usize {
        encode(&self.inputs, inputs)
    }

    pub fn joint_output(&self, outputs: &[usize]) -> usize {
        encode(&self.outputs, outputs)
    }

    pub fn decode_inputs(&self, joint: usize) -> Vec<usize> {
        decode(&self.inputs, joint)
    }

    pub fn decode_outputs(&self, joint: usize) -> Vec<usize> {
        decode(&self.outputs, joint)
    }

    /// Same parties with the ⊥ outcome removed from every flagged party.
    pub fn without_bottom(&self) -> Scenario {
        let outputs = self
            .outputs
            .iter()
            .zip(&self.bottom)
            .map(|(&o, &b)| if b { o - 1 } else { o })
            .collect();
        Scenario {
            inputs: self.inputs.clone(),
            outputs,
            bottom: vec![false; self.parties()],
        }
    }

    /// Same parties with one extra output value per party, flagged as ⊥.
    pub fn with_bottom_added(&self) -> Scenario {
        let outputs = self.outputs.iter().map(|o| o + 1).collect();
        Scenario {
            inputs: self.inputs.clone(),
            outputs,
            bottom: vec![true; self.parties()],
        }
    }

    pub(crate) fn check_inputs(&self, inputs: &[usize]) -> Result<(), CorrelationError> {
        check_digits(&self.inputs, inputs, "input")
    }

    pub(crate) fn check_outputs(&self, outputs: &[usize]) -> Result<(), CorrelationError> {
        check_digits(&self.outputs, outputs, "output")
    }
}

fn check_digits(radix: &[usize], digits: &[usize], what: &str) -> Result<(), CorrelationError> {
    if digits.len() != radix.len() {
        return Err(CorrelationError::Structural(format!(
            "expected {} {what}s, got {}",
            radix.len(),
            digits.len()
        )));
    }
    for (p, (&d, &r)) in digits.iter().zip(radix).enumerate() {
        if d >= r {
            return Err(CorrelationError::Structural(format!(
                "party {p} {what} {d} out of range 0..{r}"
            )));
        }
    }
    Ok(())
}

fn encode(radix: &[usize], digits: &[usize]) -> usize {
    debug_assert_eq!(radix.len(), digits.len());
    radix
        .iter()
        .zip(digits)
        .fold(0, |acc, (&r, &d)| acc * r + d)
}

fn decode(radix: &[usize], mut joint: usize) -> Vec<usize> {
    let mut digits = vec![0; radix.len()];
    for (slot, &r) in digits.iter_mut().zip(radix).rev() {
        *slot = joint % r;
        joint /= r;
    }
    digits
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_party_order() {
        let s = Scenario::new(vec![3, 2], vec![2, 4]).unwrap();
        assert_eq!(s.joint_input(&[2, 1]), 5);
        assert_eq!(s.decode_inputs(5), vec![2, 1]);
        assert_eq!(s.joint_output(&[1, 3]), 7);
        for j in 0..s.n_joint_outputs() {
            assert_eq!(s.joint_output(&s.decode_outputs(j)), j);
        }
        assert_eq!(s.n_cells(), 6 * 8);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Scenario::new(vec![], vec![]).is_err());
        assert!(Scenario::new(vec![2, 2], vec![2]).is_err());
        assert!(Scenario::new(vec![0], vec![2]).is_err());
        assert!(Scenario::with_bottom(vec![2], vec![1], vec![true]).is_err());
        let raw = r#"{"parties":3,"inputs":[2,2],"outputs":[2,2]}"#;
        assert!(serde_json::from_str::<Scenario>(raw).is_err());
    }

    #[test]
    fn json_shape() {
        let s = Scenario::chsh();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(
            j,
            r#"{"parties":2,"inputs":[2,2],"outputs":[2,2],"bottom":[false,false]}"#
        );
        assert_eq!(serde_json::from_str::<Scenario>(&j).unwrap(), s);
    }

    #[test]
    fn bottom_round_trip() {
        let s = Scenario::chsh().with_bottom_added();
        assert_eq!(s.outputs(), &[3, 3]);
        assert_eq!(s.bottom_outcome(1), Some(2));
        assert_eq!(s.without_bottom(), Scenario::chsh());
    }
}
