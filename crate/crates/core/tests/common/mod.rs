//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use goalsem_core::logic::QSentence;
use goalsem_core::oracle::Rational;
use rand::Rng;

/// A hypothesis at T = 2 as the set of Q-sentence indices it accepts.
pub fn accepted(fixed: &[(usize, bool)]) -> u32 {
    (0..4u32)
        .filter(|&q| fixed.iter().all(|&(s, v)| ((q >> s) & 1 == 1) == v))
        .fold(0, |m, q| m | 1 << q)
}

/// Walks every constituent at T = 2 (a set of 16 attributive constituents,
/// each a set of the 4 Q-sentences) and counts, for the ego reading,
/// constituents compatible with `e`, with `phi` and with `phi AND e`.
pub fn constituent_counts(observed: u32, phi: u32) -> (u64, u64, u64) {
    let (mut ce, mut cphi, mut joint) = (0u64, 0u64, 0u64);
    for constituent in 0u32..=u16::MAX as u32 {
        let (mut e_ok, mut phi_ok, mut both) = (false, false, false);
        for attr in 0..16u32 {
            if constituent >> attr & 1 == 0 {
                continue;
            }
            let covers = attr & observed == observed;
            let realizes = attr & phi != 0;
            e_ok |= covers;
            phi_ok |= realizes;
            both |= covers && realizes;
        }
        ce += u64::from(e_ok);
        cphi += u64::from(phi_ok);
        joint += u64::from(both);
    }
    (ce, cphi, joint)
}

fn frac(n: u64, d: u64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// `sum_i c(phi_i) cont(phi_i) - c(phi_i AND e) cont(phi_i | e)` from the
/// uniform posterior over compatible constituents.
pub fn mutual_information_by_posterior(observed: u32, hypotheses: &[u32]) -> Rational {
    let total = 1u64 << 16;
    let one = Rational::from_integer(1.into());
    let mut sum = Rational::default();
    for &phi in hypotheses {
        let (ce, cphi, joint) = constituent_counts(observed, phi);
        let prior = frac(cphi, total);
        let joint_p = frac(joint, total);
        let posterior = frac(joint, ce);
        sum += &prior * (&one - &prior) - joint_p * (&one - posterior);
    }
    sum
}

pub fn q_mask(evidence: &BTreeSet<QSentence>) -> u32 {
    evidence.iter().fold(0, |m, q| m | 1 << q.bits())
}

/// Random fixed-slot list with `1 <= Z <= t`.
pub fn random_fixed(rng: &mut impl Rng, t: usize) -> Vec<(usize, bool)> {
    let z = rng.random_range(1..=t);
    rand::seq::index::sample(rng, t, z)
        .into_iter()
        .map(|s| (s, rng.random_bool(0.5)))
        .collect()
}

/// Random set of Q-sentences of width `t` with `lo..=hi` members.
pub fn random_evidence(rng: &mut impl Rng, t: usize, lo: usize, hi: usize) -> BTreeSet<QSentence> {
    let q = 1usize << t;
    let k = rng.random_range(lo..=hi.min(q));
    rand::seq::index::sample(rng, q, k)
        .into_iter()
        .map(|b| QSentence::from_bits(b as u64, t))
        .collect()
}
