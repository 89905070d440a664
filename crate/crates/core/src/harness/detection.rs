use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{estimate_s, run, ExperimentConfig, HarnessError, RunReport, SEstimate, Source};
use crate::correlations::{Behavior, Scenario};
use crate::lhv::{behavior_of, is_local, BellFunctional, DeterministicStrategy, LocalModel};
use crate::FLOAT_TOL;

const BOTTOM: usize = 2;

/// Local model exploiting the detection loophole. The hidden variable
/// λ = (x̂, ŷ, â, b̂) with â ⊕ b̂ = x̂ŷ is uniform over its 8 values; each party
/// answers its planned bit when its input matches the planned input and ⊥
/// otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct DetectionModel;

impl DetectionModel {
    /// CHSH with ⊥ added for both parties.
    pub fn scenario() -> Scenario {
        Scenario::chsh().with_bottom_added()
    }

    fn answer(planned_input: usize, planned_bit: usize, input: usize) -> usize {
        if input == planned_input {
            planned_bit
        } else {
            BOTTOM
        }
    }

    pub fn respond(&self, x: usize, y: usize, rng: &mut ChaCha8Rng) -> [usize; 2] {
        let lam: u8 = rng.random_range(0..8);
        let (xh, yh, ah) = (
            (lam >> 2) as usize,
            ((lam >> 1) & 1) as usize,
            (lam & 1) as usize,
        );
        let bh = ah ^ (xh & yh);
        [Self::answer(xh, ah, x), Self::answer(yh, bh, y)]
    }

    /// The model as an explicit mixture of 8 deterministic strategies.
    pub fn local_model(&self) -> LocalModel {
        let s = Self::scenario();
        let strategies = (0..8usize)
            .map(|lam| {
                let (xh, yh, ah) = (lam >> 2, (lam >> 1) & 1, lam & 1);
                let bh = ah ^ (xh & yh);
                let alice = (0..2).map(|x| Self::answer(xh, ah, x)).collect();
                let bob = (0..2).map(|y| Self::answer(yh, bh, y)).collect();
                DeterministicStrategy::new(s.clone(), vec![alice, bob]).expect("valid responses")
            })
            .collect();
        LocalModel::uniform(strategies).expect("nonempty")
    }

    pub fn behavior(&self) -> Behavior {
        behavior_of(&self.local_model())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Efficiency {
    pub value: f64,
    pub stderr: f64,
}

impl Efficiency {
    fn from_counts(k: u64, n: u64) -> Self {
        let p = k as f64 / n as f64;
        Self {
            value: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionReport {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: u64,
    /// Exact ⊥-inclusive behavior passes the membership test.
    pub full_behavior_local: bool,
    /// CHSH with zero coefficients on ⊥, estimated on all rounds.
    pub full_s: SEstimate,
    pub full_local_bound: f64,
    /// CHSH on rounds where both parties detected.
    pub post_selected_s: SEstimate,
    pub kept: u64,
    pub discarded: u64,
    /// Fraction of rounds with both parties detected.
    pub coincidence: Efficiency,
    /// Per-party detection rates, reported on request.
    pub alice_efficiency: Option<Efficiency>,
    pub bob_efficiency: Option<Efficiency>,
    pub run: RunReport,
}

pub fn detection_loophole_run(
    report_efficiency: bool,
    rounds: u64,
    seed: u64,
) -> Result<DetectionReport, HarnessError> {
    let model = DetectionModel;
    let cfg = ExperimentConfig::new(Source::Detection(model), rounds, seed);
    let out = run(&cfg)?;
    let tally = &out.tally;
    let s = tally.scenario().clone();

    let lifted = BellFunctional::chsh_s().with_bottom_added();
    let full_s = estimate_s(tally, &lifted)?;
    let ps = tally.post_select();
    let post_selected_s = estimate_s(&ps.tally, &BellFunctional::chsh_s())?;

    let (mut alice, mut bob) = (0u64, 0u64);
    for (i, &n) in tally.counts().iter().enumerate() {
        let o = s.decode_outputs(i % s.n_joint_outputs());
        alice += if o[0] != BOTTOM { n } else { 0 };
        bob += if o[1] != BOTTOM { n } else { 0 };
    }
    let eff = |k: u64| report_efficiency.then(|| Efficiency::from_counts(k, rounds));

    Ok(DetectionReport {
        seed,
        n: rounds,
        full_behavior_local: is_local(&model.behavior(), FLOAT_TOL)?.is_local(),
        full_s,
        full_local_bound: lifted.local_bound()?,
        post_selected_s,
        kept: ps.kept,
        discarded: ps.discarded,
        coincidence: Efficiency::from_counts(ps.kept, rounds),
        alice_efficiency: eff(alice),
        bob_efficiency: eff(bob),
        run: out.report,
    })
}
