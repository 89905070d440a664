//! The PR box: outcomes are locally uniform bits with `a ⊕ b = x·y`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::correlations::{Behavior, Scenario};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoxError {
    #[error("{0} is not a bit")]
    NotABit(u8),
    #[error("{0:?} port already used this round")]
    PortReused(Port),
    #[error("round {0} is incomplete: both ports must be used before advancing")]
    IncompleteRound(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Port {
    Alice,
    Bob,
}

/// `p(a,b|x,y) = 1/2` if `a ⊕ b = x·y`, else 0.
pub fn pr_behavior() -> Behavior {
    Behavior::from_fn(Scenario::chsh(), |x, o| {
        if (o[0] ^ o[1]) == (x[0] & x[1]) {
            0.5
        } else {
            0.0
        }
    })
}

fn bit(v: u8) -> Result<u8, BoxError> {
    if v > 1 {
        Err(BoxError::NotABit(v))
    } else {
        Ok(v)
    }
}

/// One PR-box round with both inputs known up front.
pub fn sample<R: Rng + ?Sized>(x: u8, y: u8, rng: &mut R) -> Result<(u8, u8), BoxError> {
    let (x, y) = (bit(x)?, bit(y)?);
    let a = rng.random::<bool>() as u8;
    Ok((a, a ^ (x & y)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub round: u64,
    pub x: u8,
    pub y: u8,
    pub a: u8,
    pub b: u8,
}

/// A single-owner PR box queried one port at a time.
///
/// Whichever port is queried first in a round receives a fresh uniform bit;
/// the second receives that bit XOR `x·y`. The shared hidden bit is an
/// implementation device. For a fixed seed, outcomes depend on which port
/// goes first, but the joint statistics do not.
#[derive(Debug, Clone)]
pub struct PrBox {
    seed: u64,
    rng: ChaCha8Rng,
    round: u64,
    hidden: Option<u8>,
    alice: Option<(u8, u8)>,
    bob: Option<(u8, u8)>,
    log: Vec<RoundRecord>,
}

impl PrBox {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            round: 0,
            hidden: None,
            alice: None,
            bob: None,
            log: Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Feeds Alice's input and returns her outcome.
    pub fn input_alice(&mut self, x: u8) -> Result<u8, BoxError> {
        let x = bit(x)?;
        if self.alice.is_some() {
            return Err(BoxError::PortReused(Port::Alice));
        }
        let a = self.respond(x, self.bob.map(|(y, _)| y));
        self.alice = Some((x, a));
        Ok(a)
    }

    /// Feeds Bob's input and returns his outcome.
    pub fn input_bob(&mut self, y: u8) -> Result<u8, BoxError> {
        let y = bit(y)?;
        if self.bob.is_some() {
            return Err(BoxError::PortReused(Port::Bob));
        }
        let b = self.respond(y, self.alice.map(|(x, _)| x));
        self.bob = Some((y, b));
        Ok(b)
    }

    fn respond(&mut self, own_input: u8, other_input: Option<u8>) -> u8 {
        match other_input {
            None => {
                let r = self.rng.random::<bool>() as u8;
                self.hidden = Some(r);
                r
            }
            Some(other) => {
                self.hidden.expect("first port drew the hidden bit") ^ (own_input & other)
            }
        }
    }

    /// Closes the current round, logs it and returns its record.
    pub fn next_round(&mut self) -> Result<RoundRecord, BoxError> {
        let (Some((x, a)), Some((y, b))) = (self.alice, self.bob) else {
            return Err(BoxError::IncompleteRound(self.round));
        };
        let rec = RoundRecord {
            round: self.round,
            x,
            y,
            a,
            b,
        };
        self.log.push(rec);
        self.round += 1;
        self.hidden = None;
        self.alice = None;
        self.bob = None;
        Ok(rec)
    }

    pub fn log(&self) -> &[RoundRecord] {
        &self.log
    }

    /// `round,x,y,a,b,seed`
    pub fn write_log_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "round,x,y,a,b,seed")?;
        for r in &self.log {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.round, r.x, r.y, r.a, r.b, self.seed
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CloneRow {
    pub x: u8,
    pub a: u8,
    pub b1: u8,
    pub b2: u8,
    /// `b1 ⊕ b2`, which Bob computes locally.
    pub parity: u8,
}

/// What two PR-correlated copies of Bob's port would let Bob learn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum CloneDemo {
    /// For every `x` and hidden `a`, Bob's parity `b1 ⊕ b2` equals Alice's input.
    Signaling {
        y1: u8,
        y2: u8,
        transcript: Vec<CloneRow>,
    },
    /// Equal inputs on both copies give identical outcomes; nothing follows.
    NoContradiction { y1: u8, y2: u8 },
}

/// Two Bob ports each satisfying `b_i = a ⊕ x·y_i` with the same Alice port.
pub fn clone_signaling_demo(y1: u8, y2: u8) -> Result<CloneDemo, BoxError> {
    let (y1, y2) = (bit(y1)?, bit(y2)?);
    if y1 == y2 {
        return Ok(CloneDemo::NoContradiction { y1, y2 });
    }
    let mut transcript = Vec::with_capacity(4);
    for x in 0..2u8 {
        for a in 0..2u8 {
            let b1 = a ^ (x & y1);
            let b2 = a ^ (x & y2);
            transcript.push(CloneRow {
                x,
                a,
                b1,
                b2,
                parity: b1 ^ b2,
            });
        }
    }
    Ok(CloneDemo::Signaling { y1, y2, transcript })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::no_signaling_check;
    use crate::lhv::BellFunctional;

    #[test]
    fn table_cells() {
        let b = pr_behavior();
        assert_eq!(b.prob(&[0, 0], &[0, 0]), 0.5);
        assert_eq!(b.prob(&[1, 1], &[0, 1]), 0.5);
        assert_eq!(b.prob(&[1, 1], &[0, 0]), 0.0);
        assert!(b.validate().is_empty());
        // direct summation of the four S terms
        let s: f64 = [(0, 0, true), (0, 1, true), (1, 0, true), (1, 1, false)]
            .iter()
            .map(|&(x, y, same)| {
                if same {
                    b.prob(&[x, y], &[0, 0]) + b.prob(&[x, y], &[1, 1])
                } else {
                    b.prob(&[x, y], &[0, 1]) + b.prob(&[x, y], &[1, 0])
                }
            })
            .sum();
        assert_eq!(s, 4.0);
        assert_eq!(BellFunctional::chsh_s().value(&b).unwrap(), 4.0);
        assert!(no_signaling_check(&b, 1e-12).unwrap().passes);
    }

    #[test]
    fn sample_respects_promise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (a, b) = sample(1, 1, &mut rng).unwrap();
            assert_ne!(a, b);
        }
        assert_eq!(sample(2, 0, &mut rng), Err(BoxError::NotABit(2)));
    }

    #[test]
    fn seeded_replay() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            (0..64)
                .map(|_| sample(0, 0, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        let first = run();
        assert_eq!(first, run());
        assert!(first.iter().all(|(a, b)| a == b));
    }

    #[test]
    fn single_use_ports() {
        let mut pr = PrBox::new(1);
        pr.input_alice(1).unwrap();
        assert_eq!(pr.input_alice(0), Err(BoxError::PortReused(Port::Alice)));
        assert_eq!(pr.next_round(), Err(BoxError::IncompleteRound(0)));
        pr.input_bob(1).unwrap();
        assert_eq!(pr.input_bob(1), Err(BoxError::PortReused(Port::Bob)));
        let rec = pr.next_round().unwrap();
        assert_eq!(rec.a ^ rec.b, 1);
        assert_eq!(pr.round(), 1);
        pr.input_bob(0).unwrap();
        pr.input_alice(1).unwrap();
        let rec = pr.next_round().unwrap();
        assert_eq!(rec.a, rec.b);
    }

    #[test]
    fn split_invocation_in_both_orders() {
        let mut pr = PrBox::new(5);
        for i in 0..400u32 {
            let (x, y) = ((i & 1) as u8, (i >> 1 & 1) as u8);
            if i % 3 == 0 {
                pr.input_bob(y).unwrap();
                pr.input_alice(x).unwrap();
            } else {
                pr.input_alice(x).unwrap();
                pr.input_bob(y).unwrap();
            }
            let r = pr.next_round().unwrap();
            assert_eq!(r.a ^ r.b, r.x & r.y);
        }
        let mut csv = Vec::new();
        pr.write_log_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("round,x,y,a,b,seed\n0,0,0,"));
        assert_eq!(text.lines().count(), 401);
    }

    #[test]
    fn cloning_signals() {
        match clone_signaling_demo(0, 1).unwrap() {
            CloneDemo::Signaling { transcript, .. } => {
                assert_eq!(transcript.len(), 4);
                for row in transcript {
                    assert_eq!(row.parity, row.x);
                }
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            clone_signaling_demo(0, 0).unwrap(),
            CloneDemo::NoContradiction { y1: 0, y2: 0 }
        );
        assert!(clone_signaling_demo(0, 3).is_err());
    }
}
