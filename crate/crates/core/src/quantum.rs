//! Dense state vectors of up to ten qubits and projective measurements in the
//! real x–z plane of each qubit.
//!
//! Conventions: party `p` is qubit `p`, and qubit 0 is the most significant
//! bit of a basis index, so `|abc⟩` has index `4a + 2b + c`. This matches the
//! row-major joint-outcome order of [`Behavior`]. A measurement at angle θ
//! (from the z axis) has outcome 0 on `cos(θ/2)|0⟩ + sin(θ/2)|1⟩` and outcome 1
//! on `−sin(θ/2)|0⟩ + cos(θ/2)|1⟩`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlations::{Behavior, Scenario};
use crate::EXACT_TOL;

pub const MAX_QUBITS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("state norm is {0}, expected 1")]
    NotNormalized(f64),
    #[error("{0} qubits exceeds the dense-state cap of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        let d = amplitudes.len();
        if d < 2 || !d.is_power_of_two() {
            return Err(QuantumError::Dimension(format!(
                "{d} amplitudes is not 2^n with n >= 1"
            )));
        }
        let n_qubits = d.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(QuantumError::TooManyQubits(n_qubits));
        }
        let norm = amplitudes
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt();
        if norm.is_nan() || (norm - 1.0).abs() > EXACT_TOL {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        let norm = amplitudes
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(QuantumError::NotNormalized(norm));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(amplitudes)
    }

    /// Computational basis state `|index⟩` on `n` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self, QuantumError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QuantumError::TooManyQubits(n_qubits));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        *amps
            .get_mut(index)
            .ok_or_else(|| QuantumError::Dimension(format!("index {index} out of range")))? =
            Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    /// `(|0…0⟩ + |1…1⟩)/√2` on `n >= 2` qubits.
    pub fn ghz(n_qubits: usize) -> Result<Self, QuantumError> {
        if !(2..=MAX_QUBITS).contains(&n_qubits) {
            return Err(QuantumError::TooManyQubits(n_qubits));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[(1 << n_qubits) - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::new(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt()
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, QuantumError> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(QuantumError::TooManyQubits(n));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(StateVector {
            n_qubits: n,
            amplitudes,
        })
    }

    /// Multiplies every amplitude by `e^{iφ}`.
    pub fn with_global_phase(&self, phi: f64) -> StateVector {
        let ph = Complex64::from_polar(1.0, phi);
        StateVector {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * ph).collect(),
        }
    }
}

/// The three-qubit GHZ state `(|000⟩ + |111⟩)/√2`.
pub fn ghz_state() -> StateVector {
    StateVector::ghz(3).expect("static state")
}

/// `Φ+ = (|00⟩ + |11⟩)/√2`.
pub fn max_entangled_state() -> StateVector {
    StateVector::ghz(2).expect("static state")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitMeasurement {
    /// Radians from the z axis, in the x–z plane.
    pub angle: f64,
}

impl QubitMeasurement {
    pub fn new(angle: f64) -> Self {
        Self { angle }
    }

    /// Real basis vector of `outcome` (0 or 1) in the computational basis.
    pub fn basis_vector(&self, outcome: usize) -> [f64; 2] {
        let (s, c) = (self.angle / 2.0).sin_cos();
        match outcome {
            0 => [c, s],
            _ => [-s, c],
        }
    }
}

/// A shared state plus, for each party, one measurement per input.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSetup {
    state: StateVector,
    settings: Vec<Vec<QubitMeasurement>>,
}

impl QuantumSetup {
    pub fn new(
        state: StateVector,
        settings: Vec<Vec<QubitMeasurement>>,
    ) -> Result<Self, QuantumError> {
        if settings.len() != state.n_qubits() {
            return Err(QuantumError::Dimension(format!(
                "{} parties for a {}-qubit state",
                settings.len(),
                state.n_qubits()
            )));
        }
        if let Some(p) = settings.iter().position(Vec::is_empty) {
            return Err(QuantumError::InvalidSetup(format!(
                "party {p} has no measurement"
            )));
        }
        if settings.iter().flatten().any(|m| !m.angle.is_finite()) {
            return Err(QuantumError::InvalidSetup("non-finite angle".into()));
        }
        Ok(Self { state, settings })
    }

    /// Convenience constructor from raw angles.
    pub fn from_angles(state: StateVector, angles: Vec<Vec<f64>>) -> Result<Self, QuantumError> {
        let settings = angles
            .into_iter()
            .map(|v| v.into_iter().map(QubitMeasurement::new).collect())
            .collect();
        Self::new(state, settings)
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn settings(&self) -> &[Vec<QubitMeasurement>] {
        &self.settings
    }

    pub fn scenario(&self) -> Scenario {
        let n = self.settings.len();
        Scenario::new(self.settings.iter().map(Vec::len).collect(), vec![2; n])
            .expect("validated setup")
    }

    pub fn behavior(&self) -> Behavior {
        born_behavior(self)
    }
}

/// Born-rule probabilities `|⟨o_1 … o_n | ψ⟩|²` for every joint input.
pub fn born_behavior(q: &QuantumSetup) -> Behavior {
    let s = q.scenario();
    let n = q.state.n_qubits();
    let d = 1usize << n;
    let mut table = Vec::with_capacity(s.n_cells());
    let mut work = vec![Complex64::new(0.0, 0.0); d];
    for x in 0..s.n_joint_inputs() {
        let xs = s.decode_inputs(x);
        work.copy_from_slice(q.state.amplitudes());
        for (p, &xp) in xs.iter().enumerate() {
            let m = q.settings[p][xp];
            let u0 = m.basis_vector(0);
            let u1 = m.basis_vector(1);
            let bit = 1usize << (n - 1 - p);
            for i in 0..d {
                if i & bit == 0 {
                    let a0 = work[i];
                    let a1 = work[i | bit];
                    work[i] = a0 * u0[0] + a1 * u0[1];
                    work[i | bit] = a0 * u1[0] + a1 * u1[1];
                }
            }
        }
        table.extend(work.iter().map(Complex64::norm_sqr));
    }
    Behavior::new(s, table).expect("one cell per joint outcome")
}

/// Φ+ with Alice at {0, π/2} and Bob at {π/4, −π/4}: CHSH-S = 2 + √2.
pub fn tsirelson_setup() -> QuantumSetup {
    QuantumSetup::from_angles(
        max_entangled_state(),
        vec![vec![0.0, FRAC_PI_2], vec![FRAC_PI_4, -FRAC_PI_4]],
    )
    .expect("static setup")
}

/// `{"state": "ghz" | "phi_plus" | {"amplitudes": [[re, im], …]}, "settings": [[θ, …], …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantumSetupSpec {
    pub state: StateSpec,
    pub settings: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Amplitudes { amplitudes: Vec<[f64; 2]> },
}

impl QuantumSetupSpec {
    pub fn build(&self) -> Result<QuantumSetup, QuantumError> {
        let state = match &self.state {
            StateSpec::Named(name) => match name.as_str() {
                "ghz" => StateVector::ghz(self.settings.len().max(2))?,
                "phi_plus" => max_entangled_state(),
                other => {
                    return Err(QuantumError::InvalidSetup(format!(
                        "unknown state {other:?}"
                    )))
                }
            },
            StateSpec::Amplitudes { amplitudes } => StateVector::new(
                amplitudes
                    .iter()
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .collect(),
            )?,
        };
        QuantumSetup::from_angles(state, self.settings.clone())
    }
}
