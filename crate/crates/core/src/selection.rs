//! Budgeted evidence selection.
//!
//! [`select_semantic`] enumerates every size-`k` subset of the pool and keeps
//! the lexicographic minimum of [`SelectionKey`]:
//!
//! ```text
//! kappa = (|non-overlapping|, K, -H_(1), -H_(2), ...)
//! ```
//!
//! where `K` counts distinct Q-sentences and `H_(1) <= H_(2) <= ...` are the
//! specificities `2^(T-Z)` of the hypotheses no selected Q-sentence
//! witnesses. Specificities are stored as exponents `T - Z`.

use std::cmp::Ordering;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::logic::{distinct_q, hypothesis_satisfied_by, EvidenceItem, Hypothesis};

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelectionKey {
    n_nonoverlap: usize,
    k: usize,
    /// `T - Z` of each non-overlapping hypothesis, ascending.
    exponents: Vec<u32>,
}

impl SelectionKey {
    pub fn new(k: usize, mut exponents: Vec<u32>) -> Self {
        exponents.sort_unstable();
        Self {
            n_nonoverlap: exponents.len(),
            k,
            exponents,
        }
    }

    pub fn n_nonoverlap(&self) -> usize {
        self.n_nonoverlap
    }

    pub fn distinct(&self) -> usize {
        self.k
    }

    pub fn specificity_exponents(&self) -> &[u32] {
        &self.exponents
    }
}

/// Lexicographic order on `(n, K, -H_(1), -H_(2), ...)`.
pub fn lex_compare(a: &SelectionKey, b: &SelectionKey) -> Ordering {
    a.n_nonoverlap
        .cmp(&b.n_nonoverlap)
        .then(a.k.cmp(&b.k))
        .then_with(|| {
            // larger H first is better, so compare exponents reversed
            for (x, y) in a.exponents.iter().zip(&b.exponents) {
                match y.cmp(x) {
                    Ordering::Equal => continue,
                    other => return other,
                }
            }
            a.exponents.len().cmp(&b.exponents.len())
        })
}

impl Ord for SelectionKey {
    fn cmp(&self, other: &Self) -> Ordering {
        lex_compare(self, other)
    }
}

impl PartialOrd for SelectionKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn comparison_key(
    subset: &[EvidenceItem],
    hypotheses: &[Hypothesis],
    t: usize,
) -> SelectionKey {
    let distinct = distinct_q(subset);
    let exponents = hypotheses
        .iter()
        .filter(|h| !distinct.iter().any(|q| hypothesis_satisfied_by(q, h)))
        .map(|h| h.specificity_exponent(t))
        .collect();
    SelectionKey::new(distinct.len(), exponents)
}

/// `C(n, k)`, or `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// Lexicographic `k`-combinations of `0..n`.
pub(crate) struct Combinations {
    idx: Vec<usize>,
    n: usize,
    first: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Self {
            idx: (0..k).collect(),
            n,
            first: true,
        }
    }

    pub(crate) fn advance(&mut self) -> Option<&[usize]> {
        let k = self.idx.len();
        if self.first {
            self.first = false;
            return (k <= self.n).then_some(&self.idx[..]);
        }
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] != i + self.n - k {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(&self.idx);
            }
        }
        None
    }
}

/// Precomputed overlap structure of a pool against a hypothesis list.
struct OverlapTable {
    words: usize,
    /// per pool item: bitset of hypotheses it witnesses
    witnessed: Vec<Vec<u64>>,
    /// hypothesis indices ordered by ascending exponent
    by_exponent: Vec<(u32, usize)>,
}

impl OverlapTable {
    fn new(pool: &[EvidenceItem], hypotheses: &[Hypothesis], t: usize) -> Self {
        let words = hypotheses.len().div_ceil(64).max(1);
        let witnessed = pool
            .iter()
            .map(|item| {
                let mut bits = vec![0u64; words];
                for (i, h) in hypotheses.iter().enumerate() {
                    if hypothesis_satisfied_by(&item.q, h) {
                        bits[i / 64] |= 1 << (i % 64);
                    }
                }
                bits
            })
            .collect();
        let mut by_exponent: Vec<_> = hypotheses
            .iter()
            .enumerate()
            .map(|(i, h)| (h.specificity_exponent(t), i))
            .collect();
        by_exponent.sort_unstable();
        Self {
            words,
            witnessed,
            by_exponent,
        }
    }

    fn union(&self, members: &[usize], out: &mut [u64]) {
        out.fill(0);
        for &m in members {
            for (o, w) in out.iter_mut().zip(&self.witnessed[m]) {
                *o |= w;
            }
        }
    }

    fn exponents(&self, union: &[u64]) -> Vec<u32> {
        self.by_exponent
            .iter()
            .filter(|(_, i)| union[i / 64] >> (i % 64) & 1 == 0)
            .map(|&(e, _)| e)
            .collect()
    }
}

/// Exhaustive minimisation of the comparison key over all size-`k` subsets.
///
/// Returns the whole pool when it does not exceed the budget. Ties go to the
/// subset whose sorted entity ids are lexicographically smallest, so the
/// result does not depend on pool order. Output is sorted by entity id.
pub fn select_semantic(
    pool: &[EvidenceItem],
    hypotheses: &[Hypothesis],
    k: usize,
    t: usize,
    cap: u64,
) -> Result<Vec<EvidenceItem>> {
    if k == 0 {
        return Err(Error::config("selection budget k must be at least 1"));
    }
    let mut items = pool.to_vec();
    items.sort_unstable();
    if items.len() <= k {
        return Ok(items);
    }
    let n = items.len();
    let count = binomial(n as u64, k as u64);
    match count {
        Some(c) if c <= cap => {}
        _ => {
            return Err(Error::Feasibility(format!(
                "C({n}, {k}) = {} subsets exceeds the enumeration cap {cap}",
                count.map_or_else(|| "overflow".to_string(), |c| c.to_string())
            )))
        }
    }

    let table = OverlapTable::new(&items, hypotheses, t);
    let m = hypotheses.len();
    let mut union = vec![0u64; table.words];
    let mut best: Option<(SelectionKey, Vec<usize>)> = None;
    let mut combos = Combinations::new(n, k);
    while let Some(members) = combos.advance() {
        table.union(members, &mut union);
        let witnessed: usize = union.iter().map(|w| w.count_ones() as usize).sum();
        let n_nonoverlap = m - witnessed;
        let mut distinct = 0;
        for (a, &i) in members.iter().enumerate() {
            if members[..a].iter().all(|&j| items[j].q != items[i].q) {
                distinct += 1;
            }
        }
        if let Some((key, _)) = &best {
            // cheap prefix test before building the exponent list
            if (n_nonoverlap, distinct) > (key.n_nonoverlap, key.k) {
                continue;
            }
        }
        let key = SelectionKey {
            n_nonoverlap,
            k: distinct,
            exponents: table.exponents(&union),
        };
        let better = best.as_ref().is_none_or(|(b, _)| key < *b);
        if better {
            best = Some((key, members.to_vec()));
        }
    }
    let (_, members) = best.expect("at least one subset when n > k");
    Ok(members.into_iter().map(|i| items[i]).collect())
}

/// Uniform sample of `min(k, |pool|)` items without replacement, reproducible
/// from `seed`. Output is sorted by entity id.
pub fn select_random(pool: &[EvidenceItem], k: usize, seed: u64) -> Vec<EvidenceItem> {
    let mut items = pool.to_vec();
    items.sort_unstable();
    if items.len() <= k {
        return items;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<_> = index::sample(&mut rng, items.len(), k)
        .into_iter()
        .map(|i| items[i])
        .collect();
    picked.sort_unstable();
    picked
}
