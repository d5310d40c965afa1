//! Closed-form inductive probabilities for conjunctive slot hypotheses.
//!
//! With `Q = 2^T`, `K` distinct observed Q-sentences and a hypothesis fixing
//! `Z` slots (`H = 2^(T-Z)` compatible Q-sentences), counting constituents
//! gives
//!
//! ```text
//! alpha   = 2^(Q-K)               v = 2^-alpha
//! gamma_i = 2^(Q-K) - 2^(Q-K-H_i)  u_i = 2^-gamma_i
//! c(e) = 1 - v        c(phi_i | e) = (1 - u_i) / (1 - v)
//! F_i  = (1 - u_i)(u_i - v) / (1 - v)
//! ```
//!
//! for every hypothesis the evidence does not witness; witnessed hypotheses
//! have `c(phi_i | e) = 1` and contribute nothing.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::logic::{hypothesis_satisfied_by, Hypothesis, QSentence};

use super::Rational;

/// Largest `log2(alpha)` the big-rational path accepts: `alpha = 2^(Q-K)`
/// is the bit length of the largest denominator.
pub const MAX_LOG2_EXPONENT: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypothesisTerm {
    pub z: u32,
    pub overlapping: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedFormParams {
    t: u32,
    k: u32,
    terms: Vec<HypothesisTerm>,
}

impl ClosedFormParams {
    pub fn new(t: u32, k: u32, terms: Vec<HypothesisTerm>) -> Result<Self> {
        if t == 0 || t > 6 {
            return Err(Error::Feasibility(format!(
                "closed forms need 1 <= T <= 6 to index Q = 2^T, got T = {t}"
            )));
        }
        let q = 1u32 << t;
        if k > q {
            return Err(Error::config(format!("K = {k} exceeds Q = {q}")));
        }
        for term in &terms {
            if term.z == 0 || term.z > t {
                return Err(Error::config(format!("Z = {} outside 1..={t}", term.z)));
            }
            let h = 1u64 << (t - term.z);
            if !term.overlapping && h > u64::from(q - k) {
                // pigeonhole: H compatible patterns cannot all avoid K observed ones
                return Err(Error::config(format!(
                    "hypothesis with H = {h} cannot avoid {k} of {q} Q-sentences"
                )));
            }
        }
        Ok(Self { t, k, terms })
    }

    /// Parameters for a concrete evidence set and hypothesis list.
    pub fn from_evidence(
        evidence: &BTreeSet<QSentence>,
        hypotheses: &[Hypothesis],
        t: u32,
    ) -> Result<Self> {
        let terms = hypotheses
            .iter()
            .map(|h| HypothesisTerm {
                z: h.z() as u32,
                overlapping: evidence.iter().any(|q| hypothesis_satisfied_by(q, h)),
            })
            .collect();
        Self::new(t, evidence.len() as u32, terms)
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn terms(&self) -> &[HypothesisTerm] {
        &self.terms
    }

    /// `Q = 2^T`.
    pub fn q(&self) -> u32 {
        1 << self.t
    }

    /// `log2(alpha) = Q - K`.
    pub fn log2_alpha(&self) -> u32 {
        self.q() - self.k
    }

    /// `log2(H_i) = T - Z_i`.
    pub fn log2_h(&self, i: usize) -> u32 {
        self.t - self.terms[i].z
    }

    pub fn alpha(&self) -> BigUint {
        BigUint::one() << self.log2_alpha()
    }

    /// `gamma_i = 2^(Q-K) - 2^(Q-K-H_i)`, exact.
    pub fn gamma(&self, i: usize) -> BigUint {
        let h = 1u64 << self.log2_h(i);
        let a = u64::from(self.log2_alpha());
        (BigUint::one() << a) - (BigUint::one() << (a - h))
    }

    fn check_budget(&self) -> Result<()> {
        if self.log2_alpha() > MAX_LOG2_EXPONENT {
            return Err(Error::Feasibility(format!(
                "exponent 2^{} exceeds the 2^{MAX_LOG2_EXPONENT}-bit budget (T = {}, K = {})",
                self.log2_alpha(),
                self.t,
                self.k
            )));
        }
        Ok(())
    }

    fn v(&self) -> Rational {
        inv_pow2(1u64 << self.log2_alpha())
    }

    fn u(&self, i: usize) -> Rational {
        let h = 1u64 << self.log2_h(i);
        let a = 1u64 << self.log2_alpha();
        inv_pow2(a - (a >> h.min(63)))
    }
}

/// `2^-e` as an exact rational.
fn inv_pow2(e: u64) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << e)
}

fn one() -> Rational {
    Rational::one()
}

/// `c(e) = 1 - v`.
pub fn evidence_probability(p: &ClosedFormParams) -> Result<Rational> {
    p.check_budget()?;
    Ok(one() - p.v())
}

/// `c(phi_i | e)`.
pub fn confirmation(p: &ClosedFormParams, i: usize) -> Result<Rational> {
    p.check_budget()?;
    if p.terms[i].overlapping {
        return Ok(one());
    }
    Ok((one() - p.u(i)) / (one() - p.v()))
}

/// Prior `c(phi)` of a hypothesis fixing `z` of `t` slots (the `K = 0` case).
pub fn prior(t: u32, z: u32) -> Result<Rational> {
    let p = ClosedFormParams::new(
        t,
        0,
        vec![HypothesisTerm {
            z,
            overlapping: false,
        }],
    )?;
    let c = confirmation(&p, 0)?;
    Ok(c * evidence_probability(&p)?)
}

/// `F_i`; zero for overlapping hypotheses.
pub fn objective_term(p: &ClosedFormParams, i: usize) -> Result<Rational> {
    p.check_budget()?;
    if p.terms[i].overlapping {
        return Ok(Rational::zero());
    }
    let u = p.u(i);
    let v = p.v();
    Ok((one() - &u) * (u - &v) / (one() - v))
}

/// `F = sum_i F_i`, exact.
pub fn closed_form_objective(p: &ClosedFormParams) -> Result<Rational> {
    p.check_budget()?;
    let mut total = Rational::zero();
    for i in 0..p.terms.len() {
        total += objective_term(p, i)?;
    }
    Ok(total)
}

/// The smallest `gamma_i` over non-overlapping hypotheses, kept symbolically
/// as `(K, H_min)` via `gamma = 2^(Q-K-H) (2^H - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaMin {
    pub t: u32,
    pub k: u32,
    pub log2_h_min: u32,
}

impl GammaMin {
    /// `(Q - K - H, H)`: `gamma = 2^a (2^b - 1)`. Needs `H` to fit in `u64`.
    pub fn factors(&self) -> (u64, u64) {
        let q = 1u64 << self.t;
        let h = 1u64 << self.log2_h_min;
        (q - u64::from(self.k) - h, h)
    }

    /// Exact value, for small `T`.
    pub fn exact(&self) -> BigUint {
        let (a, b) = self.factors();
        (BigUint::one() << a) * ((BigUint::one() << b) - BigUint::one())
    }
}

/// Orders by the value of `gamma_min` without evaluating it: fewer distinct
/// Q-sentences always gives the larger value, and for equal `K` the larger
/// `H_min` does.
impl Ord for GammaMin {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.t, other.t);
        other
            .k
            .cmp(&self.k)
            .then(self.log2_h_min.cmp(&other.log2_h_min))
    }
}

impl PartialOrd for GammaMin {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticObjective {
    /// Every hypothesis is witnessed; `F = 0`.
    AllOverlapping,
    /// `F ~ 2^-gamma_min`.
    Dominant(GammaMin),
}

pub fn asymptotic_objective(p: &ClosedFormParams) -> AsymptoticObjective {
    p.terms
        .iter()
        .enumerate()
        .filter(|(_, term)| !term.overlapping)
        .map(|(i, _)| p.log2_h(i))
        .min()
        .map_or(AsymptoticObjective::AllOverlapping, |log2_h_min| {
            AsymptoticObjective::Dominant(GammaMin {
                t: p.t,
                k: p.k,
                log2_h_min,
            })
        })
}
