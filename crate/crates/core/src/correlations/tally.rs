use std::io::{Read, Write};

use serde::Serialize;

use super::{Behavior, CorrelationError, Scenario};

/// Counts of observed `(inputs, outcomes)` pairs from repeated rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TallyTable {
    scenario: Scenario,
    counts: Vec<u64>,
    /// Master seed of the run that produced the counts.
    pub rng_seed: u64,
}

/// Cell estimates `count / per-input total` with binomial standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub scenario: Scenario,
    /// `None` for every cell of a joint input that was never used.
    pub cells: Vec<Option<f64>>,
    pub stderr: Vec<Option<f64>>,
    pub totals: Vec<u64>,
    pub unknown_inputs: Vec<usize>,
    /// Cells whose estimate is exactly 0 or 1, so the plug-in stderr is 0.
    pub degenerate_cells: Vec<usize>,
}

impl Estimate {
    /// The estimated behavior; fails if any joint input has no data.
    pub fn behavior(&self) -> Result<Behavior, CorrelationError> {
        if !self.unknown_inputs.is_empty() {
            return Err(CorrelationError::Estimation(format!(
                "joint inputs {:?} have no rounds",
                self.unknown_inputs
            )));
        }
        Behavior::new(
            self.scenario.clone(),
            self.cells.iter().map(|c| c.unwrap()).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostSelection {
    pub tally: TallyTable,
    pub kept: u64,
    pub discarded: u64,
}

impl PostSelection {
    pub fn discarded_fraction(&self) -> f64 {
        let total = self.kept + self.discarded;
        if total == 0 {
            0.0
        } else {
            self.discarded as f64 / total as f64
        }
    }
}

impl TallyTable {
    pub fn new(scenario: Scenario, rng_seed: u64) -> Self {
        let counts = vec![0; scenario.n_cells()];
        Self {
            scenario,
            counts,
            rng_seed,
        }
    }

    pub fn from_counts(
        scenario: Scenario,
        counts: Vec<u64>,
        rng_seed: u64,
    ) -> Result<Self, CorrelationError> {
        if counts.len() != scenario.n_cells() {
            return Err(CorrelationError::Structural(format!(
                "{} counts for {} cells",
                counts.len(),
                scenario.n_cells()
            )));
        }
        Ok(Self {
            scenario,
            counts,
            rng_seed,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn record(&mut self, inputs: &[usize], outputs: &[usize]) -> Result<(), CorrelationError> {
        self.scenario.check_inputs(inputs)?;
        self.scenario.check_outputs(outputs)?;
        let s = &self.scenario;
        let cell = s.cell(s.joint_input(inputs), s.joint_output(outputs));
        self.counts[cell] += 1;
        Ok(())
    }

    pub fn count(&self, inputs: &[usize], outputs: &[usize]) -> u64 {
        let s = &self.scenario;
        self.counts[s.cell(s.joint_input(inputs), s.joint_output(outputs))]
    }

    /// Rounds per joint input.
    pub fn input_totals(&self) -> Vec<u64> {
        self.counts
            .chunks_exact(self.scenario.n_joint_outputs())
            .map(|r| r.iter().sum())
            .collect()
    }

    /// Adds another tally of the same scenario. Associative and commutative.
    pub fn merge(&mut self, other: &TallyTable) -> Result<(), CorrelationError> {
        if self.scenario != other.scenario {
            return Err(CorrelationError::Structural(
                "merging tallies of different scenarios".into(),
            ));
        }
        self.counts
            .iter_mut()
            .zip(&other.counts)
            .for_each(|(a, b)| *a += b);
        Ok(())
    }

    pub fn estimate(&self) -> Result<Estimate, CorrelationError> {
        estimate_behavior(self)
    }

    /// Drops every round in which some flagged party produced ⊥.
    pub fn post_select(&self) -> PostSelection {
        let s = &self.scenario;
        let target = s.without_bottom();
        let mut out = TallyTable::new(target.clone(), self.rng_seed);
        let mut kept = 0;
        let mut discarded = 0;
        for x in 0..s.n_joint_inputs() {
            for o in 0..s.n_joint_outputs() {
                let c = self.counts[s.cell(x, o)];
                let os = s.decode_outputs(o);
                if os
                    .iter()
                    .enumerate()
                    .any(|(p, &v)| s.bottom_outcome(p) == Some(v))
                {
                    discarded += c;
                } else {
                    out.counts[target.cell(x, target.joint_output(&os))] += c;
                    kept += c;
                }
            }
        }
        PostSelection {
            tally: out,
            kept,
            discarded,
        }
    }

    /// CSV header: `x,y,a,b,count` for two parties; generally one column per
    /// party input, then per party outcome, then the count.
    pub fn csv_header(scenario: &Scenario) -> Vec<String> {
        let n = scenario.parties();
        let (ins, outs): (Vec<String>, Vec<String>) = match n {
            1 => (vec!["x".into()], vec!["a".into()]),
            2 => (vec!["x".into(), "y".into()], vec!["a".into(), "b".into()]),
            3 => (
                vec!["x".into(), "y".into(), "z".into()],
                vec!["a".into(), "b".into(), "c".into()],
            ),
            _ => (
                (0..n).map(|p| format!("x{p}")).collect(),
                (0..n).map(|p| format!("a{p}")).collect(),
            ),
        };
        ins.into_iter()
            .chain(outs)
            .chain(std::iter::once("count".to_string()))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CorrelationError> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| CorrelationError::Parse(e.to_string());
        wr.write_record(Self::csv_header(&self.scenario))
            .map_err(io)?;
        let s = &self.scenario;
        for x in 0..s.n_joint_inputs() {
            let xs = s.decode_inputs(x);
            for o in 0..s.n_joint_outputs() {
                let row: Vec<String> = xs
                    .iter()
                    .chain(&s.decode_outputs(o))
                    .map(usize::to_string)
                    .chain(std::iter::once(self.counts[s.cell(x, o)].to_string()))
                    .collect();
                wr.write_record(row).map_err(io)?;
            }
        }
        wr.flush()
            .map_err(|e| CorrelationError::Parse(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    /// Reads a tally CSV; rows may come in any order and repeated rows add up.
    pub fn read_csv<R: Read>(
        scenario: Scenario,
        r: R,
        rng_seed: u64,
    ) -> Result<Self, CorrelationError> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd
            .headers()
            .map_err(|e| CorrelationError::Parse(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if header != Self::csv_header(&scenario) {
            return Err(CorrelationError::Parse(format!(
                "unexpected header {header:?}"
            )));
        }
        let n = scenario.parties();
        let mut t = TallyTable::new(scenario, rng_seed);
        for rec in rd.records() {
            let rec = rec.map_err(|e| CorrelationError::Parse(e.to_string()))?;
            let nums: Vec<u64> = rec
                .iter()
                .map(|f| {
                    f.trim()
                        .parse::<u64>()
                        .map_err(|e| CorrelationError::Parse(format!("{f:?}: {e}")))
                })
                .collect::<Result<_, _>>()?;
            let xs: Vec<usize> = nums[..n].iter().map(|&v| v as usize).collect();
            let os: Vec<usize> = nums[n..2 * n].iter().map(|&v| v as usize).collect();
            t.scenario.check_inputs(&xs)?;
            t.scenario.check_outputs(&os)?;
            let cell = t
                .scenario
                .cell(t.scenario.joint_input(&xs), t.scenario.joint_output(&os));
            t.counts[cell] += nums[2 * n];
        }
        Ok(t)
    }
}

/// Plug-in estimate of the behavior behind a tally.
///
/// Inputs with no rounds stay unknown rather than being filled in.
pub fn estimate_behavior(t: &TallyTable) -> Result<Estimate, CorrelationError> {
    if t.total() == 0 {
        return Err(CorrelationError::Estimation("tally is empty".into()));
    }
    let s = t.scenario();
    let k = s.n_joint_outputs();
    let totals = t.input_totals();
    let mut cells = Vec::with_capacity(s.n_cells());
    let mut stderr = Vec::with_capacity(s.n_cells());
    let mut unknown_inputs = Vec::new();
    let mut degenerate_cells = Vec::new();
    for (x, &n) in totals.iter().enumerate() {
        if n == 0 {
            unknown_inputs.push(x);
            cells.extend(std::iter::repeat_n(None, k));
            stderr.extend(std::iter::repeat_n(None, k));
            continue;
        }
        for o in 0..k {
            let p = t.counts()[s.cell(x, o)] as f64 / n as f64;
            if p == 0.0 || p == 1.0 {
                degenerate_cells.push(s.cell(x, o));
            }
            cells.push(Some(p));
            stderr.push(Some((p * (1.0 - p) / n as f64).sqrt()));
        }
    }
    Ok(Estimate {
        scenario: s.clone(),
        cells,
        stderr,
        totals,
        unknown_inputs,
        degenerate_cells,
    })
}
