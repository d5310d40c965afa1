//! Brute-force constituent enumeration for tiny languages.
//!
//! With `T` slots there are `Q = 2^T` Q-sentences, `2^Q` attributive
//! constituents (one per subset of Q-sentence space) and `2^(2^Q)`
//! constituents (one per subset of attributive constituents). At `T = 2`
//! that is 65,536 constituents, each held as a `u32` membership mask.
//!
//! Evidence is read from a single ego: a constituent is compatible with
//! observed Q-sentences `S` iff it asserts some attributive constituent whose
//! Q-set contains all of `S`. A goal hypothesis `exists x2. Gamma(ego, x2)`
//! additionally requires that attributive constituent to realize at least
//! one Q-sentence compatible with `Gamma`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::logic::{Hypothesis, QSentence};

use super::Rational;

pub const ENUMERATION_MAX_T: u32 = 2;

/// A hypothesis as seen by the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleHypothesis {
    /// The sentence TRUE (no fixed slots).
    Tautology,
    /// Satisfied when the ego realizes one of these Q-sentences.
    Exists(BTreeSet<QSentence>),
}

impl OracleHypothesis {
    /// All Q-sentences of width `t` matching the fixed slots; an empty slot
    /// list is the tautology.
    pub fn from_fixed(fixed: &[(usize, bool)], t: usize) -> Self {
        if fixed.is_empty() {
            return OracleHypothesis::Tautology;
        }
        let compatible = (0..1u64 << t)
            .filter(|bits| fixed.iter().all(|&(s, v)| ((bits >> s) & 1 == 1) == v))
            .map(|bits| QSentence::from_bits(bits, t))
            .collect();
        OracleHypothesis::Exists(compatible)
    }

    pub fn from_hypothesis(h: &Hypothesis, t: usize) -> Self {
        Self::from_fixed(h.fixed_slots(), t)
    }
}

/// Index bookkeeping for the enumeration domain at a fixed `T`.
#[derive(Debug, Clone, Copy)]
pub struct ConstituentSpace {
    t: u32,
}

impl ConstituentSpace {
    pub fn new(t: u32) -> Result<Self> {
        if t == 0 || t > ENUMERATION_MAX_T {
            return Err(Error::EnumerationInfeasible {
                t,
                max: ENUMERATION_MAX_T,
            });
        }
        Ok(Self { t })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    /// `Q = 2^T`.
    pub fn q_sentences(&self) -> u32 {
        1 << self.t
    }

    /// `2^Q`.
    pub fn attributive_constituents(&self) -> u32 {
        1 << self.q_sentences()
    }

    /// `2^(2^Q)`.
    pub fn constituents(&self) -> u64 {
        1u64 << self.attributive_constituents()
    }

    fn q_mask(&self, qs: &BTreeSet<QSentence>) -> Result<u32> {
        let mut mask = 0u32;
        for q in qs {
            if q.width() != self.t as usize {
                return Err(Error::config(format!(
                    "Q-sentence {q} has width {}, expected {}",
                    q.width(),
                    self.t
                )));
            }
            mask |= 1 << q.index();
        }
        Ok(mask)
    }

    /// Mask over attributive constituents that can serve as the ego's kind
    /// under `evidence` and, if given, the hypothesis.
    pub fn witness_mask(
        &self,
        hypothesis: &OracleHypothesis,
        evidence: &BTreeSet<QSentence>,
    ) -> Result<u32> {
        let observed = self.q_mask(evidence)?;
        let required = match hypothesis {
            OracleHypothesis::Tautology => None,
            OracleHypothesis::Exists(qs) => Some(self.q_mask(qs)?),
        };
        let mut mask = 0u32;
        for attr in 0..self.attributive_constituents() {
            let covers = attr & observed == observed;
            let witnesses = required.is_none_or(|h| attr & h != 0);
            if covers && witnesses {
                mask |= 1 << attr;
            }
        }
        Ok(mask)
    }

    /// Does constituent `c` satisfy the evidence (and the hypothesis)?
    pub fn satisfies(
        &self,
        constituent: u64,
        hypothesis: &OracleHypothesis,
        evidence: &BTreeSet<QSentence>,
    ) -> Result<bool> {
        Ok(constituent & u64::from(self.witness_mask(hypothesis, evidence)?) != 0)
    }

    fn count(&self, witnesses: u32) -> u64 {
        let witnesses = u64::from(witnesses);
        (0..self.constituents())
            .filter(|c| c & witnesses != 0)
            .count() as u64
    }
}

/// `|C(e)|` by enumerating every constituent.
pub fn compatible_count(evidence: &BTreeSet<QSentence>, t: u32) -> Result<u64> {
    joint_count(&OracleHypothesis::Tautology, evidence, t)
}

/// `|C(e AND phi)|` by enumeration.
pub fn joint_count(
    hypothesis: &OracleHypothesis,
    evidence: &BTreeSet<QSentence>,
    t: u32,
) -> Result<u64> {
    let space = ConstituentSpace::new(t)?;
    let witnesses = space.witness_mask(hypothesis, evidence)?;
    Ok(space.count(witnesses))
}

/// `c(e) = |C(e)| / |C|`.
pub fn evidence_probability(evidence: &BTreeSet<QSentence>, t: u32) -> Result<Rational> {
    let space = ConstituentSpace::new(t)?;
    Ok(ratio(compatible_count(evidence, t)?, space.constituents()))
}

/// `c(phi AND e)`; with empty evidence this is the prior `c(phi)`.
pub fn joint_probability(
    hypothesis: &OracleHypothesis,
    evidence: &BTreeSet<QSentence>,
    t: u32,
) -> Result<Rational> {
    let space = ConstituentSpace::new(t)?;
    Ok(ratio(
        joint_count(hypothesis, evidence, t)?,
        space.constituents(),
    ))
}

/// `c(phi | e) = |C(e AND phi)| / |C(e)|`.
pub fn degree_of_confirmation(
    hypothesis: &OracleHypothesis,
    evidence: &BTreeSet<QSentence>,
    t: u32,
) -> Result<Rational> {
    if matches!(hypothesis, OracleHypothesis::Tautology) {
        ConstituentSpace::new(t)?;
        return Ok(Rational::from_integer(1.into()));
    }
    let total = compatible_count(evidence, t)?;
    if total == 0 {
        return Err(Error::Contradiction);
    }
    Ok(ratio(joint_count(hypothesis, evidence, t)?, total))
}

/// `c(phi)` under tautological evidence.
pub fn prior_probability(hypothesis: &OracleHypothesis, t: u32) -> Result<Rational> {
    joint_probability(hypothesis, &BTreeSet::new(), t)
}

fn ratio(num: u64, den: u64) -> Rational {
    Rational::new(num.into(), den.into())
}
