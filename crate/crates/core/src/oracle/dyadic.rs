//! Exact sparse arithmetic on sums of signed powers of two.
//!
//! The objective's ingredients are `2^-alpha` and `2^-gamma_i` with exponents
//! up to `2^(2^T)`. At `T = 5` those denominators are hundreds of megabits
//! long, but every quantity involved is a short signed sum of powers of two.
//! [`DyadicSum`] stores exactly that, so `F` can be compared exactly without
//! materialising the digits.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

use super::closed_form::ClosedFormParams;
use super::Rational;

/// Exact value `sum_j d_j 2^(e_j)` with digits `d_j` in `{-1, +1}` at
/// distinct exponents. In this form the largest exponent decides the sign.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DyadicSum {
    digits: BTreeMap<i64, i8>,
}

impl DyadicSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn pow2(exp: i64) -> Self {
        Self::from_terms([(exp, 1)])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let mut acc: BTreeMap<i64, i64> = BTreeMap::new();
        for (e, c) in terms {
            *acc.entry(e).or_default() += c;
        }
        Self::normalize(acc)
    }

    fn normalize(mut acc: BTreeMap<i64, i64>) -> Self {
        let mut digits = BTreeMap::new();
        while let Some((e, c)) = acc.pop_first() {
            if c == 0 {
                continue;
            }
            let r = c % 2;
            let carry = (c - r) / 2;
            if r != 0 {
                digits.insert(e, r as i8);
            }
            if carry != 0 {
                *acc.entry(e + 1).or_default() += carry;
            }
        }
        Self { digits }
    }

    fn terms(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.digits.iter().map(|(&e, &d)| (e, i64::from(d)))
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn signum(&self) -> i8 {
        self.digits.last_key_value().map_or(0, |(_, &d)| d)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms().chain(other.terms()))
    }

    pub fn neg(&self) -> Self {
        Self {
            digits: self.digits.iter().map(|(&e, &d)| (e, -d)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_terms(
            self.terms()
                .flat_map(|(ea, da)| other.terms().map(move |(eb, db)| (ea + eb, da * db))),
        )
    }

    /// Exact rational value; only sensible for modest exponents.
    pub fn to_rational(&self) -> Rational {
        let mut total = Rational::zero();
        for (e, d) in self.terms() {
            let mag = BigInt::one() << e.unsigned_abs();
            let term = if e >= 0 {
                Rational::from_integer(mag)
            } else {
                Rational::new(BigInt::one(), mag)
            };
            if d > 0 {
                total += term;
            } else {
                total -= term;
            }
        }
        total
    }
}

impl Ord for DyadicSum {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).signum().cmp(&0)
    }
}

impl PartialOrd for DyadicSum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Largest `log2(alpha) = Q - K` the sparse path accepts; keeps every
/// exponent of a cross-multiplied comparison inside `i64`.
pub const MAX_LOG2_ALPHA: u32 = 40;

/// `F = numerator / (1 - v)`, exact, ordered by value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactObjective {
    numerator: DyadicSum,
    denominator: DyadicSum,
}

impl ExactObjective {
    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn to_rational(&self) -> Rational {
        self.numerator.to_rational() / self.denominator.to_rational()
    }
}

impl Ord for ExactObjective {
    fn cmp(&self, other: &Self) -> Ordering {
        // denominators are positive
        self.numerator
            .mul(&other.denominator)
            .cmp(&other.numerator.mul(&self.denominator))
    }
}

impl PartialOrd for ExactObjective {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The closed-form objective as an exact sparse fraction:
/// `sum_i (u_i - v - u_i^2 + u_i v) / (1 - v)` over non-overlapping `i`.
pub fn exact_objective(p: &ClosedFormParams) -> Result<ExactObjective> {
    let log2_alpha = p.log2_alpha();
    if log2_alpha > MAX_LOG2_ALPHA {
        return Err(Error::Feasibility(format!(
            "alpha = 2^{log2_alpha} exceeds the sparse path's 2^{MAX_LOG2_ALPHA} limit"
        )));
    }
    let alpha = 1i64 << log2_alpha;
    let mut terms = Vec::new();
    for (i, term) in p.terms().iter().enumerate() {
        if term.overlapping {
            continue;
        }
        let h = 1i64 << p.log2_h(i);
        let gamma = alpha - (alpha >> h);
        terms.extend([
            (-gamma, 1),
            (-alpha, -1),
            (-2 * gamma, -1),
            (-gamma - alpha, 1),
        ]);
    }
    Ok(ExactObjective {
        numerator: DyadicSum::from_terms(terms),
        denominator: DyadicSum::from_terms([(0, 1), (-alpha, -1)]),
    })
}
