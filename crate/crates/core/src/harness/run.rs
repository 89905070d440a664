use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::source::pick;
use super::{HarnessError, Source};
use crate::correlations::{no_signaling_check, Scenario, TallyTable};
use crate::lhv::BellFunctional;
use crate::relativity::{interval, IntervalClass, PartyEvents};
use crate::EXACT_TOL;

/// Independent per-party input distributions.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputDistribution {
    #[default]
    Uniform,
    PerParty(Vec<Vec<f64>>),
}

impl InputDistribution {
    fn cdfs(&self, s: &Scenario) -> Result<Vec<Vec<f64>>, HarnessError> {
        let probs: Vec<Vec<f64>> = match self {
            InputDistribution::Uniform => s
                .inputs()
                .iter()
                .map(|&m| vec![1.0 / m as f64; m])
                .collect(),
            InputDistribution::PerParty(p) => p.clone(),
        };
        if probs.len() != s.parties() {
            return Err(HarnessError::Config(format!(
                "{} input distributions for {} parties",
                probs.len(),
                s.parties()
            )));
        }
        for (p, dist) in probs.iter().enumerate() {
            let sum: f64 = dist.iter().sum();
            if dist.len() != s.inputs()[p]
                || dist.iter().any(|v| v.is_nan() || *v < 0.0)
                || (sum - 1.0).abs() > EXACT_TOL
            {
                return Err(HarnessError::Config(format!(
                    "party {p}: input distribution {dist:?} is not normalised"
                )));
            }
        }
        Ok(probs
            .iter()
            .map(|d| {
                let mut acc = 0.0;
                d.iter()
                    .map(|v| {
                        acc += v;
                        acc
                    })
                    .collect()
            })
            .collect())
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: Source,
    pub rounds: u64,
    pub inputs: InputDistribution,
    pub seed: u64,
    /// Per-party input and outcome events, for the locality audit.
    pub geometry: Option<Vec<PartyEvents>>,
    /// Declares ⊥ outcomes to be independent of the hidden state.
    pub fair_sampling: bool,
}

impl ExperimentConfig {
    pub fn new(source: Source, rounds: u64, seed: u64) -> Self {
        Self {
            source,
            rounds,
            inputs: InputDistribution::Uniform,
            seed,
            geometry: None,
            fair_sampling: false,
        }
    }

    pub fn echo(&self) -> Value {
        json!({
            "source": self.source.describe(),
            "rounds": self.rounds,
            "inputs": self.inputs,
            "seed": self.seed,
            "geometry": self.geometry,
            "fair_sampling": self.fair_sampling,
            "seeding": "round i uses ChaCha8 stream i of seed_from_u64(seed)",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Parallel,
}

/// Generator for round `round` of a run with `seed`.
pub fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SEstimate {
    pub value: f64,
    pub stderr: f64,
}

impl SEstimate {
    pub fn ci95(&self) -> [f64; 2] {
        [
            self.value - 1.96 * self.stderr,
            self.value + 1.96 * self.stderr,
        ]
    }
}

/// Stratified estimate of a functional from a tally: the per-input means of
/// the coefficient are summed, and their sampling variances added.
pub fn estimate_s(t: &TallyTable, f: &BellFunctional) -> Result<SEstimate, HarnessError> {
    let s = t.scenario();
    if s != f.scenario() {
        return Err(HarnessError::Config(
            "functional and tally scenarios differ".into(),
        ));
    }
    let k = s.n_joint_outputs();
    let mut value = 0.0;
    let mut var = 0.0;
    for (x, n) in t.input_totals().into_iter().enumerate() {
        if n == 0 {
            return Err(HarnessError::Config(format!(
                "joint input {x} was never drawn"
            )));
        }
        let n = n as f64;
        let (mut m1, mut m2) = (0.0, 0.0);
        for o in 0..k {
            let p = t.counts()[s.cell(x, o)] as f64 / n;
            let c = f.coefficients()[s.cell(x, o)];
            m1 += c * p;
            m2 += c * c * p;
        }
        value += m1;
        var += (m2 - m1 * m1).max(0.0) / n;
    }
    Ok(SEstimate {
        value,
        stderr: var.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LoopholeReport {
    #[serde(rename = "locality")]
    pub locality_loophole_open: bool,
    #[serde(rename = "detection")]
    pub detection_loophole_open: bool,
}

/// Locality: some party's input is not spacelike to another party's outcome.
/// Detection: ⊥ outcomes were recorded without a fair-sampling declaration.
pub fn loophole_audit(
    cfg: &ExperimentConfig,
    tally: &TallyTable,
) -> Result<LoopholeReport, HarnessError> {
    let geometry = cfg.geometry.as_ref().ok_or(HarnessError::MissingGeometry)?;
    let mut locality_open = false;
    for (i, a) in geometry.iter().enumerate() {
        for (j, b) in geometry.iter().enumerate() {
            if i != j && interval(&a.input, &b.outcome)?.class != IntervalClass::Spacelike {
                locality_open = true;
            }
        }
    }
    Ok(LoopholeReport {
        locality_loophole_open: locality_open,
        detection_loophole_open: detection_open(cfg, tally),
    })
}

fn detection_open(cfg: &ExperimentConfig, tally: &TallyTable) -> bool {
    !cfg.fair_sampling && tally.post_select().discarded > 0
}

#[derive(Debug, Clone, Serialize)]
pub struct LoopholeSection {
    /// `null` when no geometry was supplied.
    pub locality: Option<bool>,
    pub detection: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config_echo: Value,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub tallies_ref: Option<String>,
    #[serde(rename = "S_hat")]
    pub s_hat: Option<f64>,
    pub stderr: Option<f64>,
    pub ci95: Option<[f64; 2]>,
    pub no_signaling_max_dev: Option<f64>,
    pub loopholes: LoopholeSection,
    /// Present when ⊥ outcomes occurred: the same estimate on both-detected rounds.
    pub post_selected: Option<PostSelectedSummary>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PostSelectedSummary {
    #[serde(rename = "S_hat")]
    pub s_hat: Option<f64>,
    pub stderr: Option<f64>,
    pub kept: u64,
    pub discarded: u64,
    pub discarded_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub tally: TallyTable,
    pub report: RunReport,
}

/// The CHSH-S form matching a tally scenario, if it has one.
fn chsh_for(s: &Scenario) -> Option<BellFunctional> {
    let chsh = BellFunctional::chsh_s();
    if s == chsh.scenario() {
        Some(chsh)
    } else if *s == Scenario::chsh().with_bottom_added() {
        Some(chsh.with_bottom_added())
    } else {
        None
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    run_with(cfg, Parallelism::Parallel)
}

pub fn run_with(cfg: &ExperimentConfig, mode: Parallelism) -> Result<RunOutput, HarnessError> {
    if cfg.rounds == 0 {
        return Err(HarnessError::Config("rounds must be >= 1".into()));
    }
    let scenario = cfg.source.scenario();
    let input_cdfs = cfg.inputs.cdfs(&scenario)?;
    let prepared = cfg.source.prepare()?;
    let k = scenario.n_joint_outputs();
    let one_round = |acc: &mut Vec<u64>, i: u64| {
        let mut rng = round_rng(cfg.seed, i);
        let inputs: Vec<usize> = input_cdfs
            .iter()
            .map(|c| pick(c, rng.random::<f64>()))
            .collect();
        let o = prepared.sample(&scenario, &inputs, &mut rng);
        acc[scenario.joint_input(&inputs) * k + o] += 1;
    };
    let counts = match mode {
        Parallelism::Sequential => {
            let mut acc = vec![0u64; scenario.n_cells()];
            (0..cfg.rounds).for_each(|i| one_round(&mut acc, i));
            acc
        }
        Parallelism::Parallel => (0..cfg.rounds)
            .into_par_iter()
            .fold(
                || vec![0u64; scenario.n_cells()],
                |mut acc, i| {
                    one_round(&mut acc, i);
                    acc
                },
            )
            .reduce(
                || vec![0u64; scenario.n_cells()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            ),
    };
    let tally = TallyTable::from_counts(scenario.clone(), counts, cfg.seed)?;
    let report = report_for(cfg, &tally)?;
    Ok(RunOutput { tally, report })
}

fn report_for(cfg: &ExperimentConfig, tally: &TallyTable) -> Result<RunReport, HarnessError> {
    let mut warnings = Vec::new();
    let s_est = match chsh_for(tally.scenario()) {
        Some(f) => match estimate_s(tally, &f) {
            Ok(e) => Some(e),
            Err(e) => {
                warnings.push(format!("S not estimated: {e}"));
                None
            }
        },
        None => {
            warnings.push("no CHSH form for this scenario; S not estimated".into());
            None
        }
    };
    let est = tally.estimate()?;
    let no_signaling_max_dev = match est.behavior() {
        Ok(b) => Some(no_signaling_check(&b, 0.0)?.max_deviation),
        Err(e) => {
            warnings.push(format!("no-signaling audit skipped: {e}"));
            None
        }
    };
    let post_selected = if tally.scenario().has_bottom() {
        let ps = tally.post_select();
        let s = chsh_for(ps.tally.scenario()).and_then(|f| estimate_s(&ps.tally, &f).ok());
        Some(PostSelectedSummary {
            s_hat: s.map(|e| e.value),
            stderr: s.map(|e| e.stderr),
            kept: ps.kept,
            discarded: ps.discarded,
            discarded_fraction: ps.discarded_fraction(),
        })
    } else {
        None
    };
    let locality = match &cfg.geometry {
        Some(_) => Some(loophole_audit(cfg, tally)?.locality_loophole_open),
        None => None,
    };
    Ok(RunReport {
        config_echo: cfg.echo(),
        seed: cfg.seed,
        n: cfg.rounds,
        tallies_ref: None,
        s_hat: s_est.map(|e| e.value),
        stderr: s_est.map(|e| e.stderr),
        ci95: s_est.map(|e| e.ci95()),
        no_signaling_max_dev,
        loopholes: LoopholeSection {
            locality,
            detection: detection_open(cfg, tally),
        },
        post_selected,
        warnings,
    })
}
