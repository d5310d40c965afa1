//! Cross-check of the selection key against the exact objective.
//!
//! For random pools and hypothesis lists, every pair of size-`k` subsets is
//! ordered twice: by [`SelectionKey`] and by the exact objective `F`
//! (sparse dyadic arithmetic, so `T = 5` stays exact). Pairs are then
//! classified by whether the two orders agree.

use std::cmp::Ordering;
use std::fmt;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logic::{distinct_q, Action, EvidenceItem, Hypothesis, QSentence};
use crate::oracle::{exact_objective, ClosedFormParams, ExactObjective};
use crate::selection::{comparison_key, Combinations, SelectionKey};

/// One random selection problem.
#[derive(Debug, Clone)]
pub struct KeyInstance {
    pub t: usize,
    pub k: usize,
    pub pool: Vec<EvidenceItem>,
    pub hypotheses: Vec<Hypothesis>,
}

impl fmt::Display for KeyInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T={} k={} pool=[", self.t, self.k)?;
        for (i, item) in self.pool.iter().enumerate() {
            let sep = if i == 0 { "" } else { " " };
            write!(f, "{sep}{}", item.q)?;
        }
        write!(f, "] hypotheses=[")?;
        for (i, h) in self.hypotheses.iter().enumerate() {
            let sep = if i == 0 { "" } else { " " };
            let slots: Vec<String> = h
                .fixed_slots()
                .iter()
                .map(|(s, v)| format!("{s}={}", u8::from(*v)))
                .collect();
            write!(f, "{sep}{{{}}}", slots.join(","))?;
        }
        write!(f, "]")
    }
}

/// Random pool of `n` entities and `1..=max_hypotheses` hypotheses with
/// uniformly random fixed slots.
pub fn random_instance(
    rng: &mut impl Rng,
    t: usize,
    n: usize,
    k: usize,
    max_hypotheses: usize,
) -> Result<KeyInstance> {
    if t == 0 || t > 6 || k == 0 || k > n {
        return Err(Error::config(format!(
            "need 1 <= T <= 6 and 1 <= k <= n, got T = {t}, n = {n}, k = {k}"
        )));
    }
    let pool = (0..n)
        .map(|id| EvidenceItem {
            entity_id: id as u32,
            q: QSentence::from_bits(rng.random_range(0..1u64 << t), t),
        })
        .collect();
    let m = rng.random_range(1..=max_hypotheses.max(1));
    let hypotheses = (0..m)
        .map(|id| {
            let z = rng.random_range(1..=t);
            let slots = rand::seq::index::sample(rng, t, z);
            let fixed = slots
                .into_iter()
                .map(|s| (s, rng.random_bool(0.5)))
                .collect();
            Hypothesis::new(id, format!("h{id}"), fixed, Action::Normal, t)
        })
        .collect::<Result<_>>()?;
    Ok(KeyInstance {
        t,
        k,
        pool,
        hypotheses,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct KeyReport {
    pub instances: u64,
    pub comparisons: u64,
    /// Both orders strict and in the same direction.
    pub agreements: u64,
    /// Both orders tie.
    pub ties: u64,
    /// Both orders strict, opposite directions.
    pub disagreements: u64,
    /// Key ties while `F` differs.
    pub key_ties_unequal_f: u64,
    /// Key strict while `F` ties.
    pub f_ties_strict_key: u64,
    /// Instances where the key's minimiser is not an `F` minimiser.
    pub argmin_mismatches: u64,
    /// First disagreeing instance, for reproduction.
    pub first_disagreement: Option<String>,
}

impl KeyReport {
    pub fn merge(&mut self, other: KeyReport) {
        self.instances += other.instances;
        self.comparisons += other.comparisons;
        self.agreements += other.agreements;
        self.ties += other.ties;
        self.disagreements += other.disagreements;
        self.key_ties_unequal_f += other.key_ties_unequal_f;
        self.f_ties_strict_key += other.f_ties_strict_key;
        self.argmin_mismatches += other.argmin_mismatches;
        if self.first_disagreement.is_none() {
            self.first_disagreement = other.first_disagreement;
        }
    }

    pub fn key_tie_rate(&self) -> f64 {
        if self.comparisons == 0 {
            0.0
        } else {
            self.key_ties_unequal_f as f64 / self.comparisons as f64
        }
    }
}

impl fmt::Display for KeyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instances: {}", self.instances)?;
        writeln!(f, "comparisons: {}", self.comparisons)?;
        writeln!(f, "agreements: {}", self.agreements)?;
        writeln!(f, "ties: {}", self.ties)?;
        writeln!(f, "disagreements: {}", self.disagreements)?;
        writeln!(f, "key ties with unequal F: {}", self.key_ties_unequal_f)?;
        writeln!(f, "F ties with strict key: {}", self.f_ties_strict_key)?;
        write!(f, "argmin mismatches: {}", self.argmin_mismatches)?;
        if let Some(d) = &self.first_disagreement {
            write!(f, "\nfirst disagreement: {d}")?;
        }
        Ok(())
    }
}

/// Exact `F` of one subset.
pub fn subset_objective(
    subset: &[EvidenceItem],
    hypotheses: &[Hypothesis],
    t: usize,
) -> Result<ExactObjective> {
    let evidence = distinct_q(subset);
    let params = ClosedFormParams::from_evidence(&evidence, hypotheses, t as u32)?;
    exact_objective(&params)
}

/// Compares both orders on every pair of size-`k` subsets of one instance.
pub fn check_instance(inst: &KeyInstance) -> Result<KeyReport> {
    let mut scored: Vec<(SelectionKey, ExactObjective)> = Vec::new();
    let mut combos = Combinations::new(inst.pool.len(), inst.k);
    let mut subset = Vec::with_capacity(inst.k);
    while let Some(members) = combos.advance() {
        subset.clear();
        subset.extend(members.iter().map(|&i| inst.pool[i]));
        let key = comparison_key(&subset, &inst.hypotheses, inst.t);
        let f = subset_objective(&subset, &inst.hypotheses, inst.t)?;
        scored.push((key, f));
    }
    let mut report = KeyReport {
        instances: 1,
        ..KeyReport::default()
    };
    for (i, (ka, fa)) in scored.iter().enumerate() {
        for (kb, fb) in &scored[i + 1..] {
            report.comparisons += 1;
            match (ka.cmp(kb), fa.cmp(fb)) {
                (Ordering::Equal, Ordering::Equal) => report.ties += 1,
                (Ordering::Equal, _) => report.key_ties_unequal_f += 1,
                (_, Ordering::Equal) => report.f_ties_strict_key += 1,
                (a, b) if a == b => report.agreements += 1,
                _ => report.disagreements += 1,
            }
        }
    }
    if report.disagreements > 0 {
        report.first_disagreement = Some(inst.to_string());
    }
    let key_min = scored.iter().map(|(k, _)| k).min();
    let f_min = scored.iter().map(|(_, f)| f).min();
    if let (Some(km), Some(fm)) = (key_min, f_min) {
        let key_choice_is_f_optimal = scored.iter().any(|(k, f)| k == km && f == fm);
        if !key_choice_is_f_optimal {
            report.argmin_mismatches += 1;
        }
    }
    Ok(report)
}

/// Parameters of a validation run; each trial draws `T`, `n` and `k`
/// uniformly from the given ranges (with `k <= n`).
#[derive(Debug, Clone)]
pub struct KeyValidation {
    pub trials: u64,
    pub t: RangeInclusive<usize>,
    pub n: RangeInclusive<usize>,
    pub k: RangeInclusive<usize>,
    pub max_hypotheses: usize,
    pub seed: u64,
}

pub fn validate_key(cfg: &KeyValidation) -> Result<KeyReport> {
    if cfg.t.is_empty() || cfg.n.is_empty() || cfg.k.is_empty() || *cfg.k.start() == 0 {
        return Err(Error::config("empty T, n or k range"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = KeyReport::default();
    for _ in 0..cfg.trials {
        let t = rng.random_range(cfg.t.clone());
        let n = rng.random_range(cfg.n.clone());
        let k = rng.random_range(cfg.k.clone()).min(n);
        let inst = random_instance(&mut rng, t, n, k, cfg.max_hypotheses)?;
        report.merge(check_instance(&inst)?);
    }
    Ok(report)
}
