use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{round_rng, HarnessError};
use crate::correlations::{JointDistribution, Scenario};
use crate::relativity::{influence_reaches, EventKind, Frame, SpacetimeEvent, Units, VCausalModel};

/// GHZ experiment under a hidden-communication model. Each party has one
/// measurement event; Alice's influence travels to Bob and Charlie, who must
/// not be able to influence each other.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VCausalGhzConfig {
    pub model: VCausalModel,
    /// Alice, Bob, Charlie.
    pub events: [SpacetimeEvent; 3],
    pub alice_measures: bool,
}

impl VCausalGhzConfig {
    /// Alice at the origin at t = 0; Bob and Charlie 100 km away, 10 km
    /// apart, measuring simultaneously 10 μs later. Lab frame privileged.
    pub fn standard(speed: f64, alice_measures: bool) -> Result<Self, HarnessError> {
        let ev =
            |p, pos, t| SpacetimeEvent::new(p, EventKind::OutcomeRegistered, pos, t, Units::Si);
        Ok(Self {
            model: VCausalModel::new(Frame::lab(), speed)?,
            events: [
                ev(0, [0.0; 3], 0.0),
                ev(1, [100e3, 5e3, 0.0], 10e-6),
                ev(2, [100e3, -5e3, 0.0], 10e-6),
            ],
            alice_measures,
        })
    }

    /// Alice's input 1 is "measure"; she outputs ⊥ when idle.
    pub fn scenario() -> Scenario {
        Scenario::with_bottom(vec![2, 1, 1], vec![3, 2, 2], vec![true, false, false])
            .expect("static scenario")
    }

    /// Whether Alice's influence reaches Bob and Charlie. Fails if Bob and
    /// Charlie can reach each other.
    pub fn validate(&self) -> Result<[bool; 2], HarnessError> {
        let [a, b, c] = &self.events;
        if !self.events.iter().all(SpacetimeEvent::is_finite) {
            return Err(HarnessError::Config("non-finite event coordinates".into()));
        }
        if influence_reaches(b, c, &self.model)? || influence_reaches(c, b, &self.model)? {
            return Err(HarnessError::IsolationViolated(format!(
                "an influence at {} c connects Bob and Charlie",
                self.model.speed()
            )));
        }
        Ok([
            influence_reaches(a, b, &self.model)?,
            influence_reaches(a, c, &self.model)?,
        ])
    }
}

/// How Bob and Charlie answer given Alice's outcome (`None` when she did not
/// measure) and which of them her influence reached. Implementations may add
/// local variables of their own to model mixed scenarios.
pub trait HiddenInfluenceResponse: Sync {
    fn respond(&self, alice: Option<u8>, reach: [bool; 2], rng: &mut ChaCha8Rng) -> (u8, u8);
}

/// Reached parties copy Alice's outcome; everyone else answers with a fresh
/// uniform bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct PureCommunication;

impl HiddenInfluenceResponse for PureCommunication {
    fn respond(&self, alice: Option<u8>, reach: [bool; 2], rng: &mut ChaCha8Rng) -> (u8, u8) {
        let mut answer = |reached: bool| match alice {
            Some(a) if reached => a,
            _ => rng.random_range(0..2u8),
        };
        let b = answer(reach[0]);
        let c = answer(reach[1]);
        (b, c)
    }
}

pub(crate) fn pure_round(
    measure: bool,
    reach: [bool; 2],
    rng: &mut ChaCha8Rng,
) -> (Option<u8>, u8, u8) {
    round_with(&PureCommunication, measure, reach, rng)
}

fn round_with<R: HiddenInfluenceResponse + ?Sized>(
    r: &R,
    measure: bool,
    reach: [bool; 2],
    rng: &mut ChaCha8Rng,
) -> (Option<u8>, u8, u8) {
    let a = measure.then(|| rng.random_range(0..2u8));
    let (b, c) = r.respond(a, reach, rng);
    (a, b, c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhzArmReport {
    pub alice_measures: bool,
    pub reach: [bool; 2],
    pub rounds: u64,
    pub seed: u64,
    /// Counts of (b, c), indexed `[b][c]`.
    pub bc_counts: [[u64; 2]; 2],
    pub p_equal: f64,
    pub stderr: f64,
    /// Empirical mutual information between b and c, in bits.
    pub bc_mutual_information: f64,
    /// Sampling scale of that estimate if b and c were independent:
    /// bias `1/(2N ln 2)` and standard deviation `√2/(2N ln 2)`.
    pub bc_mi_null_mean: f64,
    pub bc_mi_null_stderr: f64,
}

impl GhzArmReport {
    pub fn equal(&self) -> u64 {
        self.bc_counts[0][0] + self.bc_counts[1][1]
    }

    /// Whether the b–c mutual information is within 3 null stderr of what
    /// independent outcomes would give.
    pub fn bc_independent(&self) -> bool {
        self.bc_mutual_information <= self.bc_mi_null_mean + 3.0 * self.bc_mi_null_stderr
    }
}

pub fn ghz_vcausal_run(
    cfg: &VCausalGhzConfig,
    rounds: u64,
    seed: u64,
) -> Result<GhzArmReport, HarnessError> {
    ghz_vcausal_run_with(cfg, rounds, seed, &PureCommunication)
}

pub fn ghz_vcausal_run_with<R: HiddenInfluenceResponse + ?Sized>(
    cfg: &VCausalGhzConfig,
    rounds: u64,
    seed: u64,
    response: &R,
) -> Result<GhzArmReport, HarnessError> {
    if rounds == 0 {
        return Err(HarnessError::Config("rounds must be >= 1".into()));
    }
    let reach = cfg.validate()?;
    let counts = (0..rounds)
        .into_par_iter()
        .fold(
            || [0u64; 4],
            |mut acc, i| {
                let mut rng = round_rng(seed, i);
                let (_, b, c) = round_with(response, cfg.alice_measures, reach, &mut rng);
                acc[2 * b as usize + c as usize] += 1;
                acc
            },
        )
        .reduce(|| [0u64; 4], |a, b| std::array::from_fn(|k| a[k] + b[k]));
    let n = rounds as f64;
    let p_equal = (counts[0] + counts[3]) as f64 / n;
    let scale = 2.0 * n * std::f64::consts::LN_2;
    Ok(GhzArmReport {
        alice_measures: cfg.alice_measures,
        reach,
        rounds,
        seed,
        bc_counts: [[counts[0], counts[1]], [counts[2], counts[3]]],
        p_equal,
        stderr: (p_equal * (1.0 - p_equal) / n).sqrt(),
        bc_mutual_information: JointDistribution::from_counts(2, 2, &counts)?.mutual_information(),
        bc_mi_null_mean: 1.0 / scale,
        bc_mi_null_stderr: std::f64::consts::SQRT_2 / scale,
    })
}

/// Both arms of the signaling experiment with equal priors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhzSignalingReport {
    pub measure: GhzArmReport,
    pub idle: GhzArmReport,
    /// Mutual information between the arm and `1[b = c]`, in bits.
    pub mutual_information_bits: f64,
    /// `H(3/4) − 1/2`, the value when both influences arrive.
    pub closed_form_bits: f64,
}

/// Runs `rounds` rounds of each arm. The measuring arm uses `seed`, the idle
/// arm `seed + 1`.
pub fn ghz_signaling(
    cfg: &VCausalGhzConfig,
    rounds: u64,
    seed: u64,
) -> Result<GhzSignalingReport, HarnessError> {
    let arm = |m: bool, s: u64| {
        ghz_vcausal_run(
            &VCausalGhzConfig {
                alice_measures: m,
                ..cfg.clone()
            },
            rounds,
            s,
        )
    };
    let measure = arm(true, seed)?;
    let idle = arm(false, seed.wrapping_add(1))?;
    let row = |r: &GhzArmReport| [r.rounds - r.equal(), r.equal()];
    let counts: Vec<u64> = row(&measure).into_iter().chain(row(&idle)).collect();
    let mi = JointDistribution::from_counts(2, 2, &counts)?.mutual_information();
    let h = |p: f64| -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
    Ok(GhzSignalingReport {
        measure,
        idle,
        mutual_information_bits: mi,
        closed_form_bits: h(0.75) - 0.5,
    })
}
