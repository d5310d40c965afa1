//! Exact inductive probabilities under the indicator likelihood with a
//! uniform prior over constituents: `c(phi | e) = |C(e AND phi)| / |C(e)|`.
//!
//! Two independent routes are provided: brute-force enumeration of every
//! constituent for `T <= 2` ([`enumerate`]) and the closed forms for
//! conjunctive slot hypotheses ([`closed_form`], with an exact sparse
//! representation in [`dyadic`] for sizes the big-rational path refuses).

pub mod closed_form;
pub mod dyadic;
pub mod enumerate;

use std::collections::BTreeSet;

use num_traits::One;

use crate::error::Result;
use crate::logic::QSentence;

pub use closed_form::{
    asymptotic_objective, closed_form_objective, AsymptoticObjective, ClosedFormParams, GammaMin,
    HypothesisTerm,
};
pub use dyadic::{exact_objective, DyadicSum, ExactObjective};
pub use enumerate::{
    compatible_count, degree_of_confirmation, ConstituentSpace, OracleHypothesis, ENUMERATION_MAX_T,
};

pub type Rational = num_rational::BigRational;

/// `cont = 1 - c`.
pub fn content(c: &Rational) -> Rational {
    Rational::one() - c
}

/// `H_s(Phi) = sum_i c(phi_i) * cont(phi_i)`, by enumeration.
pub fn prior_semantic_entropy(hypotheses: &[OracleHypothesis], t: u32) -> Result<Rational> {
    let mut total = Rational::default();
    for h in hypotheses {
        let prior = enumerate::prior_probability(h, t)?;
        total += content(&prior) * prior;
    }
    Ok(total)
}

/// `H_s(Phi | e) = sum_i c(phi_i AND e) * cont(phi_i | e)`, by enumeration.
///
/// Empty evidence still asserts that the ego exists, so it differs from the
/// prior entropy by the weight of the empty constituent.
pub fn semantic_entropy(
    hypotheses: &[OracleHypothesis],
    evidence: &BTreeSet<QSentence>,
    t: u32,
) -> Result<Rational> {
    let mut total = Rational::default();
    for h in hypotheses {
        let joint = enumerate::joint_probability(h, evidence, t)?;
        let conditional = degree_of_confirmation(h, evidence, t)?;
        total += joint * content(&conditional);
    }
    Ok(total)
}

/// `I_s(Phi; e) = H_s(Phi) - H_s(Phi | e)`, accumulated hypothesis by
/// hypothesis as `c(phi_i) cont(phi_i) - c(phi_i AND e) cont(phi_i | e)`.
pub fn semantic_mutual_information(
    hypotheses: &[OracleHypothesis],
    evidence: &BTreeSet<QSentence>,
    t: u32,
) -> Result<Rational> {
    let mut total = Rational::default();
    for h in hypotheses {
        let prior = enumerate::prior_probability(h, t)?;
        let joint = enumerate::joint_probability(h, evidence, t)?;
        let conditional = degree_of_confirmation(h, evidence, t)?;
        total += &prior * content(&prior) - joint * content(&conditional);
    }
    Ok(total)
}
