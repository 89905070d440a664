use serde::Serialize;

use super::functional::{local_max_with_cap, Certificate};
use super::simplex::{phase_one, Feasibility, SimplexOptions};
use super::strategy::enumerate_with_cap;
use super::{behavior_of, BellFunctional, LhvError, LocalModel, DEFAULT_STRATEGY_CAP};
use crate::correlations::{Behavior, CorrelationError, Scenario};

/// Outcome of a local-polytope membership query.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    /// Weights over deterministic strategies reproducing the behavior.
    Local { model: LocalModel, residual: f64 },
    /// A functional whose value on the behavior exceeds its local bound.
    Nonlocal { certificate: Certificate },
}

impl Membership {
    pub fn is_local(&self) -> bool {
        matches!(self, Membership::Local { .. })
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Membership::Nonlocal { certificate } => Some(certificate),
            Membership::Local { .. } => None,
        }
    }

    pub fn to_json_value(&self) -> Result<serde_json::Value, LhvError> {
        Ok(match self {
            Membership::Local { model, residual } => serde_json::json!({
                "local": true,
                "model": model,
                "residual": residual,
            }),
            Membership::Nonlocal { certificate } => serde_json::json!({
                "local": false,
                "certificate": certificate.to_json_value()?,
            }),
        })
    }
}

impl Serialize for Membership {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        self.to_json_value()
            .map_err(serde::ser::Error::custom)?
            .serialize(ser)
    }
}

/// Decides whether `b` is a mixture of deterministic strategies.
///
/// Feasibility is solved over the enumerated strategies. A local answer is
/// re-checked by rebuilding the behavior from the returned weights (L∞
/// residual at most `tol`). A nonlocal answer always carries a functional
/// whose value on `b` exceeds its exact local bound by more than `tol`:
///
///   * in the binary two-party scenario, the most violated of the eight CHSH
///     forms (value − bound ≤ 1, bound 3), which is always available there;
///   * otherwise the phase-one dual, scaled so that value − bound = 1.
///
/// Anything that fails those re-checks is a [`LhvError::NumericalFailure`].
pub fn is_local(b: &Behavior, tol: f64) -> Result<Membership, LhvError> {
    is_local_with_cap(b, tol, DEFAULT_STRATEGY_CAP)
}

pub fn is_local_with_cap(b: &Behavior, tol: f64, cap: u128) -> Result<Membership, LhvError> {
    let report = b.validate();
    if !report.is_empty() {
        return Err(CorrelationError::InvalidBehavior(report).into());
    }
    let s = b.scenario();
    let strategies = enumerate_with_cap(s, cap)?;
    let columns: Vec<Vec<f64>> = strategies
        .iter()
        .map(|st| st.behavior().table().to_vec())
        .collect();
    let opts = SimplexOptions {
        feasibility_tol: tol,
        ..SimplexOptions::default()
    };
    match phase_one(&columns, b.table(), opts).map_err(LhvError::NumericalFailure)? {
        Feasibility::Feasible { w, .. } => {
            let total: f64 = w.iter().sum();
            let (kept, weights): (Vec<_>, Vec<_>) = strategies
                .into_iter()
                .zip(w)
                .filter(|(_, w)| *w > 0.0)
                .map(|(s, w)| (s, w / total))
                .unzip();
            let model = LocalModel::new(kept, weights)
                .map_err(|e| LhvError::NumericalFailure(e.to_string()))?;
            let rebuilt = behavior_of(&model);
            let residual = rebuilt
                .table()
                .iter()
                .zip(b.table())
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
            if residual > tol {
                return Err(LhvError::NumericalFailure(format!(
                    "round-trip residual {residual:e} exceeds {tol:e}"
                )));
            }
            Ok(Membership::Local { model, residual })
        }
        Feasibility::Infeasible { dual, .. } => {
            if *s == Scenario::chsh() {
                if let Some(cert) = chsh_certificate(b, tol)? {
                    return Ok(Membership::Nonlocal { certificate: cert });
                }
            }
            let raw = BellFunctional::new(s.clone(), dual)?;
            let gap = raw.value(b)? - local_max_with_cap(&raw, cap)?.value;
            if !gap.is_finite() || gap <= 0.0 {
                return Err(LhvError::NumericalFailure(format!(
                    "dual certificate has gap {gap:e}"
                )));
            }
            let functional = raw.scaled(1.0 / gap);
            let witnessed_value = functional.value(b)?;
            let local_bound = local_max_with_cap(&functional, cap)?.value;
            if witnessed_value - local_bound <= tol {
                return Err(LhvError::NumericalFailure(
                    "certificate does not separate".into(),
                ));
            }
            Ok(Membership::Nonlocal {
                certificate: Certificate {
                    functional,
                    witnessed_value,
                    local_bound,
                    normalization: "phase-one dual scaled so witnessed_value - local_bound = 1",
                },
            })
        }
    }
}

fn chsh_certificate(b: &Behavior, tol: f64) -> Result<Option<Certificate>, LhvError> {
    let mut best: Option<(f64, BellFunctional)> = None;
    for alpha in 0..2 {
        for beta in 0..2 {
            for gamma in 0..2 {
                let f = BellFunctional::chsh_variant(alpha, beta, gamma);
                let v = f.value(b)?;
                if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, f));
                }
            }
        }
    }
    let (witnessed_value, functional) = best.expect("eight candidates");
    let local_bound = functional.local_bound()?;
    if witnessed_value <= local_bound + tol {
        return Ok(None);
    }
    Ok(Some(Certificate {
        functional,
        witnessed_value,
        local_bound,
        normalization: "CHSH form: one point per round meeting a⊕b = xy⊕αx⊕βy⊕γ",
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhv::enumerate_deterministic;

    fn pr() -> Behavior {
        Behavior::from_fn(Scenario::chsh(), |x, o| {
            if (o[0] ^ o[1]) == (x[0] & x[1]) {
                0.5
            } else {
                0.0
            }
        })
    }

    #[test]
    fn pr_box_is_nonlocal_with_chsh_certificate() {
        let m = is_local(&pr(), 1e-9).unwrap();
        let c = m.certificate().expect("nonlocal");
        assert_eq!(c.functional, BellFunctional::chsh_s());
        assert_eq!(c.witnessed_value, 4.0);
        assert_eq!(c.local_bound, 3.0);
    }

    #[test]
    fn relabelled_pr_box_picks_matching_variant() {
        let b = pr().relabel_outcomes(0, 1, &[1, 0]).unwrap();
        let c = is_local(&b, 1e-9).unwrap().certificate().cloned().unwrap();
        assert_eq!(c.witnessed_value, 4.0);
        assert_ne!(c.functional, BellFunctional::chsh_s());
    }

    #[test]
    fn mixtures_are_local() {
        let all = enumerate_deterministic(&Scenario::chsh()).unwrap();
        let weights: Vec<f64> = (1..=16).map(|i| i as f64 / 136.0).collect();
        let model = LocalModel::new(all, weights).unwrap();
        let b = behavior_of(&model);
        match is_local(&b, 1e-9).unwrap() {
            Membership::Local { residual, .. } => assert!(residual <= 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_chsh_scenario_uses_dual() {
        // PR box on inputs 0/1 of a three-input scenario, copied on input 2
        let s = Scenario::new(vec![3, 2], vec![2, 2]).unwrap();
        let b = Behavior::from_fn(s, |x, o| {
            let xa = x[0].min(1);
            if (o[0] ^ o[1]) == (xa & x[1]) {
                0.5
            } else {
                0.0
            }
        });
        let c = is_local(&b, 1e-9)
            .unwrap()
            .certificate()
            .cloned()
            .expect("nonlocal");
        assert!((c.gap() - 1.0).abs() < 1e-9);
        assert!(c.witnessed_value > c.local_bound + 1e-9);
        assert_eq!(
            c.local_bound,
            local_max_with_cap(&c.functional, 1 << 20).unwrap().value
        );
    }

    #[test]
    fn invalid_behavior_is_not_a_verdict() {
        let b = Behavior::new(Scenario::chsh(), vec![0.3; 16]).unwrap();
        assert!(matches!(is_local(&b, 1e-9), Err(LhvError::Correlation(_))));
    }

    #[test]
    fn cap_exceeded() {
        let b = Behavior::uniform(Scenario::uniform(2, 20, 20).unwrap());
        assert!(matches!(
            is_local(&b, 1e-9),
            Err(LhvError::CapExceeded { .. })
        ));
    }
}
