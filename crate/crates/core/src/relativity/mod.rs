//! Special-relativistic event geometry and finite-speed hidden-influence models.
//!
//! Events carry their unit system. In SI mode positions are metres and times
//! seconds; in natural mode `c = 1`. Mixing the two is an error.

mod scan;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use scan::{
    scan_speed_bound, FrameBound, ScanGeometry, ScanPreset, ScanResult, SitePosition, SpeedBound,
};

/// Speed of light in m/s.
pub const C_SI: f64 = 299_792_458.0;
/// Stand-in for an "infinite" hidden-influence speed, in units of c.
pub const SPEED_CAP: f64 = 1e9;
/// Relative threshold below which an interval counts as lightlike.
pub const LIGHTLIKE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum RelativityError {
    #[error("events use different unit systems")]
    UnitMismatch,
    #[error("frame speed |β| = {0} must be < 1")]
    InvalidFrame(f64),
    #[error("hidden-influence speed {0} c must be finite, >= 1 and <= {SPEED_CAP:e}")]
    InvalidSpeed(f64),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Si,
    /// `c = 1`
    Natural,
}

impl Units {
    pub fn c(self) -> f64 {
        match self {
            Units::Si => C_SI,
            Units::Natural => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    InputChosen,
    OutcomeRegistered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLabel {
    pub party: usize,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeEvent {
    pub label: EventLabel,
    pub position: Vector3<f64>,
    pub time: f64,
    #[serde(default)]
    pub units: Units,
}

impl SpacetimeEvent {
    pub fn new(party: usize, kind: EventKind, position: [f64; 3], time: f64, units: Units) -> Self {
        Self {
            label: EventLabel { party, kind },
            position: Vector3::from(position),
            time,
            units,
        }
    }

    /// SI event on the x axis.
    pub fn on_axis(party: usize, kind: EventKind, x_m: f64, t_s: f64) -> Self {
        Self::new(party, kind, [x_m, 0.0, 0.0], t_s, Units::Si)
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_finite() && self.position.iter().all(|v| v.is_finite())
    }
}

/// An inertial frame moving at velocity `β c` relative to the lab.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    beta: Vector3<f64>,
}

impl Frame {
    pub fn new(beta: [f64; 3]) -> Result<Self, RelativityError> {
        let beta = Vector3::from(beta);
        let speed = beta.norm();
        if speed.is_nan() || speed >= 1.0 {
            return Err(RelativityError::InvalidFrame(speed));
        }
        Ok(Self { beta })
    }

    pub fn lab() -> Self {
        Self {
            beta: Vector3::zeros(),
        }
    }

    /// Frame moving along `x` at `beta` (signed).
    pub fn along_x(beta: f64) -> Result<Self, RelativityError> {
        Self::new([beta, 0.0, 0.0])
    }

    pub fn beta(&self) -> Vector3<f64> {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - self.beta.norm_squared()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalClass {
    Timelike,
    Lightlike,
    Spacelike,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub class: IntervalClass,
    /// `c²Δt² − |Δx|²`
    pub invariant: f64,
}

fn same_units(a: &SpacetimeEvent, b: &SpacetimeEvent) -> Result<Units, RelativityError> {
    if a.units != b.units {
        return Err(RelativityError::UnitMismatch);
    }
    Ok(a.units)
}

/// Classifies the separation of two events by the sign of `c²Δt² − |Δx|²`.
pub fn interval(e1: &SpacetimeEvent, e2: &SpacetimeEvent) -> Result<Interval, RelativityError> {
    let c = same_units(e1, e2)?.c();
    let ct = c * (e2.time - e1.time);
    let dx2 = (e2.position - e1.position).norm_squared();
    let invariant = ct * ct - dx2;
    let scale = ct * ct + dx2;
    let class = if invariant.abs() <= LIGHTLIKE_REL_TOL * scale {
        IntervalClass::Lightlike
    } else if invariant > 0.0 {
        IntervalClass::Timelike
    } else {
        IntervalClass::Spacelike
    };
    Ok(Interval { class, invariant })
}

/// Coordinates of `e` in frame `f`.
pub fn boost(e: &SpacetimeEvent, f: &Frame) -> SpacetimeEvent {
    let b2 = f.beta.norm_squared();
    if b2 == 0.0 {
        return *e;
    }
    let c = e.units.c();
    let g = f.gamma();
    let bx = f.beta.dot(&e.position);
    let time = g * (e.time - bx / c);
    let position = e.position + f.beta * ((g - 1.0) * bx / b2) - f.beta * (g * c * e.time);
    SpacetimeEvent {
        time,
        position,
        ..*e
    }
}

/// Hidden influences travelling at `speed · c` in a privileged frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VCausalModel {
    pub privileged: Frame,
    /// In units of c.
    speed: f64,
}

impl VCausalModel {
    pub fn new(privileged: Frame, speed: f64) -> Result<Self, RelativityError> {
        if !(speed.is_finite() && (1.0..=SPEED_CAP).contains(&speed)) {
            return Err(RelativityError::InvalidSpeed(speed));
        }
        Ok(Self { privileged, speed })
    }

    /// The fastest model allowed, standing in for an instantaneous influence.
    pub fn at_cap(privileged: Frame) -> Self {
        Self {
            privileged,
            speed: SPEED_CAP,
        }
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }
}

/// Whether an influence leaving `source` reaches `target` under model `m`:
/// in the privileged frame, `t_target >= t_source + |Δx| / v`.
pub fn influence_reaches(
    source: &SpacetimeEvent,
    target: &SpacetimeEvent,
    m: &VCausalModel,
) -> Result<bool, RelativityError> {
    let c = same_units(source, target)?.c();
    let s = boost(source, &m.privileged);
    let t = boost(target, &m.privileged);
    let transit = (t.position - s.position).norm() / (m.speed * c);
    Ok(t.time - s.time >= transit)
}

/// Both parties, each in its own frame, measure first.
pub fn before_before(
    e_a: &SpacetimeEvent,
    e_b: &SpacetimeEvent,
    frame_a: &Frame,
    frame_b: &Frame,
) -> Result<bool, RelativityError> {
    let iv = interval(e_a, e_b)?;
    if iv.class != IntervalClass::Spacelike {
        return Err(RelativityError::Configuration(format!(
            "events are {:?}; their time order is the same in every frame",
            iv.class
        )));
    }
    let a_first_for_a = boost(e_a, frame_a).time < boost(e_b, frame_a).time;
    let b_first_for_b = boost(e_b, frame_b).time < boost(e_a, frame_b).time;
    Ok(a_first_for_a && b_first_for_b)
}

/// A party's input choice and nominal outcome registration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartyEvents {
    pub input: SpacetimeEvent,
    pub outcome: SpacetimeEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRequirement {
    pub from_party: usize,
    pub to_party: usize,
    /// Speed needed to get from `from_party`'s input to `to_party`'s delayed
    /// outcome; infinite when the outcome is not later than the input.
    pub required_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayedOutcome {
    pub delay: f64,
    /// Largest required speed over all ordered pairs, in the events' units.
    pub required_speed: f64,
    pub pairs: Vec<PairRequirement>,
    /// A light-speed-bounded influence reaches every delayed outcome in time.
    pub viable: bool,
}

/// Delays every outcome by `delay` and asks how fast an influence from each
/// other party's input must travel to reach it.
pub fn delayed_outcome_viable(
    parties: &[PartyEvents],
    delay: f64,
) -> Result<DelayedOutcome, RelativityError> {
    if !delay.is_finite() || delay < 0.0 {
        return Err(RelativityError::Configuration(format!(
            "delay {delay} must be finite and >= 0"
        )));
    }
    if parties.len() < 2 {
        return Err(RelativityError::Configuration(
            "need at least two parties".into(),
        ));
    }
    let units = parties[0].input.units;
    if parties
        .iter()
        .any(|p| p.input.units != units || p.outcome.units != units)
    {
        return Err(RelativityError::UnitMismatch);
    }
    let mut pairs = Vec::new();
    for (i, src) in parties.iter().enumerate() {
        for (j, dst) in parties.iter().enumerate() {
            if i == j {
                continue;
            }
            let dt = dst.outcome.time + delay - src.input.time;
            let d = (dst.outcome.position - src.input.position).norm();
            let required_speed = if d == 0.0 && dt >= 0.0 {
                0.0
            } else if dt > 0.0 {
                d / dt
            } else {
                f64::INFINITY
            };
            pairs.push(PairRequirement {
                from_party: src.input.label.party,
                to_party: dst.outcome.label.party,
                required_speed,
            });
        }
    }
    let required_speed = pairs.iter().map(|p| p.required_speed).fold(0.0, f64::max);
    Ok(DelayedOutcome {
        delay,
        required_speed,
        viable: required_speed <= units.c(),
        pairs,
    })
}
