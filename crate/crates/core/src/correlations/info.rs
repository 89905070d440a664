use super::CorrelationError;
use crate::EXACT_TOL;

/// A joint distribution over a finite alphabet pair `(U, V)`, row-major in `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    p: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, p: Vec<f64>) -> Result<Self, CorrelationError> {
        if rows == 0 || cols == 0 || p.len() != rows * cols {
            return Err(CorrelationError::InvalidJoint(format!(
                "{} probabilities for a {rows}x{cols} alphabet",
                p.len()
            )));
        }
        if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(CorrelationError::InvalidJoint(format!(
                "entry {v} is not a probability"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > EXACT_TOL {
            return Err(CorrelationError::InvalidJoint(format!("sums to {sum}")));
        }
        Ok(Self { rows, cols, p })
    }

    /// Normalised empirical distribution of a count table.
    pub fn from_counts(rows: usize, cols: usize, counts: &[u64]) -> Result<Self, CorrelationError> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(CorrelationError::InvalidJoint("no counts".into()));
        }
        Self::new(
            rows,
            cols,
            counts.iter().map(|&c| c as f64 / total as f64).collect(),
        )
    }

    /// Independent coupling of two marginals.
    pub fn product(pu: &[f64], pv: &[f64]) -> Result<Self, CorrelationError> {
        let p = pu
            .iter()
            .flat_map(|a| pv.iter().map(move |b| a * b))
            .collect();
        Self::new(pu.len(), pv.len(), p)
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.p[u * self.cols + v]
    }

    pub fn marginal_u(&self) -> Vec<f64> {
        self.p
            .chunks_exact(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn marginal_v(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|v| (0..self.rows).map(|u| self.get(u, v)).sum())
            .collect()
    }

    pub fn mutual_information(&self) -> f64 {
        mutual_information(self)
    }
}

/// Shannon mutual information `I(U:V)` in bits, with `0 log 0 = 0`.
pub fn mutual_information(j: &JointDistribution) -> f64 {
    let pu = j.marginal_u();
    let pv = j.marginal_v();
    let mut acc = 0.0;
    for (u, &a) in pu.iter().enumerate() {
        for (v, &b) in pv.iter().enumerate() {
            let p = j.get(u, v);
            if p > 0.0 {
                acc += p * (p / (a * b)).log2();
            }
        }
    }
    // Rounding can leave a tiny negative value on product distributions.
    acc.max(0.0)
}
