//! Predicate vocabulary, slot map, Q-sentences and goal hypotheses.
//!
//! A Q-sentence is the complete truth pattern of every predicate occurrence
//! for one (ego, entity) pair. Slot `s` of the pattern is bit `s` of a `u64`,
//! so the engine supports up to [`MAX_SLOTS`] predicate occurrences.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on T for the engine (bit patterns live in a `u64`, exponents
/// `T - Z` must stay small integers).
pub const MAX_SLOTS: usize = 62;

const DEFAULT_VOCABULARY: &str = include_str!("../data/vocabulary.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredicateCategory {
    /// `P(x2)`: a property of the observed entity.
    MonadicOnEntity,
    /// `P(ego, x2)`.
    DyadicEgoEntity,
    /// `P(x2, ego)`.
    DyadicEntityEgo,
}

impl fmt::Display for PredicateCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredicateCategory::MonadicOnEntity => "monadic-on-entity",
            PredicateCategory::DyadicEgoEntity => "dyadic-ego-entity",
            PredicateCategory::DyadicEntityEgo => "dyadic-entity-ego",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub category: PredicateCategory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateVocabulary {
    #[serde(rename = "predicate")]
    predicates: Vec<Predicate>,
}

impl PredicateVocabulary {
    pub fn new(predicates: Vec<Predicate>) -> Result<Self> {
        let vocab = Self { predicates };
        vocab.validate()?;
        Ok(vocab)
    }

    fn validate(&self) -> Result<()> {
        if self.predicates.is_empty() {
            return Err(Error::config("vocabulary has no predicates"));
        }
        if self.predicates.len() > MAX_SLOTS {
            return Err(Error::config(format!(
                "vocabulary has {} predicate slots, the engine supports at most {MAX_SLOTS}",
                self.predicates.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for p in &self.predicates {
            if p.name.is_empty() {
                return Err(Error::config("predicate with empty name"));
            }
            if !seen.insert(p.name.as_str()) {
                return Err(Error::config(format!(
                    "duplicate predicate name `{}`",
                    p.name
                )));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let vocab: Self =
            toml::from_str(s).map_err(|e| Error::config(format!("vocabulary: {e}")))?;
        vocab.validate()?;
        Ok(vocab)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// The shipped ten-predicate traffic vocabulary.
    pub fn traffic_default() -> Self {
        Self::from_toml_str(DEFAULT_VOCABULARY).expect("bundled vocabulary is valid")
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    /// Number of predicate slots.
    pub fn t(&self) -> usize {
        self.predicates.len()
    }
}

/// Bijection from predicate occurrences onto `0..T`, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotMap {
    by_key: BTreeMap<(PredicateCategory, String), usize>,
    by_name: HashMap<String, usize>,
    keys: Vec<(PredicateCategory, String)>,
}

pub fn build_slot_map(vocab: &PredicateVocabulary) -> Result<SlotMap> {
    vocab.validate()?;
    let mut by_key = BTreeMap::new();
    let mut by_name = HashMap::new();
    let mut keys = Vec::with_capacity(vocab.t());
    for (slot, p) in vocab.predicates.iter().enumerate() {
        by_key.insert((p.category, p.name.clone()), slot);
        by_name.insert(p.name.clone(), slot);
        keys.push((p.category, p.name.clone()));
    }
    Ok(SlotMap {
        by_key,
        by_name,
        keys,
    })
}

impl SlotMap {
    pub fn t(&self) -> usize {
        self.keys.len()
    }

    pub fn slot(&self, category: PredicateCategory, name: &str) -> Option<usize> {
        self.by_key.get(&(category, name.to_owned())).copied()
    }

    pub fn slot_by_name(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn occurrence(&self, slot: usize) -> Option<(PredicateCategory, &str)> {
        self.keys.get(slot).map(|(c, n)| (*c, n.as_str()))
    }

    pub fn occurrences(&self) -> impl Iterator<Item = (usize, PredicateCategory, &str)> {
        self.keys
            .iter()
            .enumerate()
            .map(|(s, (c, n))| (s, *c, n.as_str()))
    }
}

/// Complete truth pattern over the `T` predicate slots for one pair.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QSentence {
    bits: u64,
    width: u8,
}

impl QSentence {
    /// Bits above `width` are discarded.
    pub fn from_bits(bits: u64, width: usize) -> Self {
        assert!(
            (1..=MAX_SLOTS).contains(&width),
            "Q-sentence width {width} out of range"
        );
        Self {
            bits: bits & width_mask(width),
            width: width as u8,
        }
    }

    pub fn zero(width: usize) -> Self {
        Self::from_bits(0, width)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn get(&self, slot: usize) -> bool {
        debug_assert!(slot < self.width());
        (self.bits >> slot) & 1 == 1
    }

    pub fn with(mut self, slot: usize, value: bool) -> Self {
        assert!(
            slot < self.width(),
            "slot {slot} outside width {}",
            self.width
        );
        if value {
            self.bits |= 1 << slot;
        } else {
            self.bits &= !(1 << slot);
        }
        self
    }

    /// Index of this pattern in the `2^T` Q-sentence space.
    pub fn index(&self) -> u64 {
        self.bits
    }
}

impl fmt::Debug for QSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q({self})")
    }
}

/// Most significant slot first, so slot 0 is the rightmost character.
impl fmt::Display for QSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in (0..self.width()).rev() {
            f.write_str(if self.get(s) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn width_mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Task action attached to a goal hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    Stop,
    Slow,
    Normal,
    Fast,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Stop, Action::Slow, Action::Normal, Action::Fast];

    /// Cells advanced per step.
    pub fn speed(self) -> u32 {
        match self {
            Action::Stop => 0,
            Action::Slow => 1,
            Action::Normal => 2,
            Action::Fast => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Stop => "Stop",
            Action::Slow => "Slow",
            Action::Normal => "Normal",
            Action::Fast => "Fast",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A goal-oriented state grounded at the ego: `exists x2` such that the
/// pair's Q-sentence matches every fixed slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypothesis {
    pub id: usize,
    pub name: String,
    fixed: Vec<(usize, bool)>,
    care: u64,
    want: u64,
    pub action: Action,
}

impl Hypothesis {
    pub fn new(
        id: usize,
        name: impl Into<String>,
        mut fixed: Vec<(usize, bool)>,
        action: Action,
        t: usize,
    ) -> Result<Self> {
        let name = name.into();
        if fixed.is_empty() {
            return Err(Error::config(format!("hypothesis `{name}` fixes no slots")));
        }
        fixed.sort_unstable();
        let mut care = 0u64;
        let mut want = 0u64;
        for &(slot, value) in &fixed {
            if slot >= t {
                return Err(Error::config(format!(
                    "hypothesis `{name}` uses slot {slot} but T = {t}"
                )));
            }
            if care & (1 << slot) != 0 {
                return Err(Error::config(format!(
                    "hypothesis `{name}` fixes slot {slot} twice"
                )));
            }
            care |= 1 << slot;
            if value {
                want |= 1 << slot;
            }
        }
        Ok(Self {
            id,
            name,
            fixed,
            care,
            want,
            action,
        })
    }

    pub fn fixed_slots(&self) -> &[(usize, bool)] {
        &self.fixed
    }

    /// Number of fixed slots, `Z`.
    pub fn z(&self) -> usize {
        self.fixed.len()
    }

    /// `T - Z`, the base-2 logarithm of the number of compatible Q-sentences.
    pub fn specificity_exponent(&self, t: usize) -> u32 {
        debug_assert!(self.z() <= t);
        (t - self.z()) as u32
    }

    pub fn care_mask(&self) -> u64 {
        self.care
    }

    pub fn want_bits(&self) -> u64 {
        self.want
    }
}

pub fn hypothesis_satisfied_by(q: &QSentence, h: &Hypothesis) -> bool {
    q.bits & h.care == h.want
}

/// One observed (ego, entity) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EvidenceItem {
    pub entity_id: u32,
    #[serde(serialize_with = "serialize_q")]
    pub q: QSentence,
}

fn serialize_q<S: serde::Serializer>(q: &QSentence, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

pub fn distinct_q<'a>(pool: impl IntoIterator<Item = &'a EvidenceItem>) -> BTreeSet<QSentence> {
    pool.into_iter().map(|item| item.q).collect()
}

/// Builds the Q-sentence of one pair from a truth assignment over the
/// vocabulary's predicate occurrences. Every occurrence must be assigned.
pub fn ground_pair(
    truth: &HashMap<(PredicateCategory, String), bool>,
    slots: &SlotMap,
) -> Result<QSentence> {
    ground_with(slots, |category, name| {
        truth.get(&(category, name.to_owned())).copied()
    })
}

/// Like [`ground_pair`], with the assignment supplied by a lookup function.
pub fn ground_with(
    slots: &SlotMap,
    mut value: impl FnMut(PredicateCategory, &str) -> Option<bool>,
) -> Result<QSentence> {
    let mut q = QSentence::zero(slots.t());
    for (slot, category, name) in slots.occurrences() {
        match value(category, name) {
            Some(v) => q = q.with(slot, v),
            None => return Err(Error::MissingPredicate(name.to_owned())),
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vocab(names: &[(&str, PredicateCategory)]) -> PredicateVocabulary {
        PredicateVocabulary::new(
            names
                .iter()
                .map(|(n, c)| Predicate {
                    name: n.to_string(),
                    category: *c,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn slot_map_covers_declaration_order() {
        use PredicateCategory::*;
        let v = vocab(&[
            ("IsPedestrian", MonadicOnEntity),
            ("InIntersection", DyadicEgoEntity),
            ("Approaching", DyadicEntityEgo),
        ]);
        let map = build_slot_map(&v).unwrap();
        assert_eq!(map.t(), 3);
        assert_eq!(map.slot(MonadicOnEntity, "IsPedestrian"), Some(0));
        assert_eq!(map.slot(DyadicEgoEntity, "InIntersection"), Some(1));
        assert_eq!(map.slot(DyadicEntityEgo, "Approaching"), Some(2));
        assert_eq!(map.slot(MonadicOnEntity, "Approaching"), None);
        assert_eq!(build_slot_map(&v).unwrap(), map);
    }

    #[test]
    fn slot_map_at_paper_scale() {
        let preds = (0..34)
            .map(|i| Predicate {
                name: format!("P{i}"),
                category: PredicateCategory::DyadicEgoEntity,
            })
            .collect();
        let map = build_slot_map(&PredicateVocabulary::new(preds).unwrap()).unwrap();
        assert_eq!(map.t(), 34);
        let slots: BTreeSet<_> = map.occurrences().map(|(s, _, _)| s).collect();
        assert_eq!(slots, (0..34).collect());
    }

    #[test]
    fn empty_and_duplicate_vocabularies_rejected() {
        assert!(matches!(
            PredicateVocabulary::new(vec![]),
            Err(Error::Config(_))
        ));
        let dup = vec![
            Predicate {
                name: "A".into(),
                category: PredicateCategory::MonadicOnEntity,
            },
            Predicate {
                name: "A".into(),
                category: PredicateCategory::DyadicEgoEntity,
            },
        ];
        assert!(matches!(
            PredicateVocabulary::new(dup),
            Err(Error::Config(_))
        ));
        let text = "[[predicate]]\nname = \"A\"\ncategory = \"monadic-on-entity\"\n\
                    [[predicate]]\nname = \"A\"\ncategory = \"monadic-on-entity\"\n";
        assert!(PredicateVocabulary::from_toml_str(text).is_err());
    }

    #[test]
    fn default_vocabulary_has_ten_slots() {
        let v = PredicateVocabulary::traffic_default();
        assert_eq!(v.t(), 10);
        assert!(build_slot_map(&v).is_ok());
    }

    #[test]
    fn grounding_zero_and_single_bit() {
        use PredicateCategory::*;
        let v = vocab(&[
            ("IsPedestrian", MonadicOnEntity),
            ("InIntersection", DyadicEgoEntity),
        ]);
        let map = build_slot_map(&v).unwrap();
        let mut truth = HashMap::new();
        truth.insert((MonadicOnEntity, "IsPedestrian".to_string()), false);
        truth.insert((DyadicEgoEntity, "InIntersection".to_string()), false);
        assert_eq!(ground_pair(&truth, &map).unwrap(), QSentence::zero(2));
        truth.insert((MonadicOnEntity, "IsPedestrian".to_string()), true);
        let q = ground_pair(&truth, &map).unwrap();
        assert_eq!(q.to_string(), "01");
        assert_eq!(q.bits(), 0b01);
    }

    #[test]
    fn grounding_requires_full_assignment() {
        use PredicateCategory::*;
        let v = vocab(&[
            ("IsPedestrian", MonadicOnEntity),
            ("InIntersection", DyadicEgoEntity),
        ]);
        let map = build_slot_map(&v).unwrap();
        let mut truth = HashMap::new();
        truth.insert((MonadicOnEntity, "IsPedestrian".to_string()), true);
        assert!(matches!(
            ground_pair(&truth, &map),
            Err(Error::MissingPredicate(p)) if p == "InIntersection"
        ));
    }

    #[test]
    fn grounding_three_entity_scene_matches_truth_table() {
        use PredicateCategory::*;
        let v = vocab(&[
            ("IsPedestrian", MonadicOnEntity),
            ("Ahead", DyadicEgoEntity),
            ("Approaching", DyadicEntityEgo),
        ]);
        let map = build_slot_map(&v).unwrap();
        // entity -> (IsPedestrian, Ahead, Approaching), evaluated by hand.
        let scene = [
            (1u32, [true, true, false]),
            (2, [false, true, true]),
            (3, [false, false, false]),
        ];
        let expected = ["011", "110", "000"];
        for ((_, row), want) in scene.iter().zip(expected) {
            let q = ground_with(&map, |_, name| match name {
                "IsPedestrian" => Some(row[0]),
                "Ahead" => Some(row[1]),
                "Approaching" => Some(row[2]),
                _ => None,
            })
            .unwrap();
            assert_eq!(q.to_string(), want);
        }
    }

    fn hyp(fixed: Vec<(usize, bool)>, t: usize) -> Hypothesis {
        Hypothesis::new(0, "h", fixed, Action::Stop, t).unwrap()
    }

    #[test]
    fn satisfaction_examples() {
        let q = QSentence::from_bits(0b01, 2);
        assert!(hypothesis_satisfied_by(&q, &hyp(vec![(0, true)], 2)));
        assert!(!hypothesis_satisfied_by(
            &q,
            &hyp(vec![(0, true), (1, true)], 2)
        ));
    }

    #[test]
    fn satisfaction_matches_truth_table_at_t2() {
        let fixed_sets = [
            vec![(0, false)],
            vec![(0, true)],
            vec![(1, false)],
            vec![(1, true)],
            vec![(0, false), (1, false)],
            vec![(0, true), (1, false)],
            vec![(0, false), (1, true)],
            vec![(0, true), (1, true)],
        ];
        for fixed in fixed_sets {
            let h = hyp(fixed.clone(), 2);
            for bits in 0..4u64 {
                let q = QSentence::from_bits(bits, 2);
                let brute = fixed.iter().all(|&(s, v)| ((bits >> s) & 1 == 1) == v);
                assert_eq!(hypothesis_satisfied_by(&q, &h), brute, "{fixed:?} {q}");
            }
        }
    }

    #[test]
    fn hypothesis_validation() {
        assert!(Hypothesis::new(0, "e", vec![], Action::Stop, 4).is_err());
        assert!(Hypothesis::new(0, "o", vec![(4, true)], Action::Stop, 4).is_err());
        assert!(Hypothesis::new(0, "d", vec![(1, true), (1, false)], Action::Stop, 4).is_err());
        let h = Hypothesis::new(0, "ok", vec![(3, true), (1, false)], Action::Slow, 34).unwrap();
        assert_eq!(h.z(), 2);
        assert_eq!(h.specificity_exponent(34), 32);
        assert_eq!(h.fixed_slots(), &[(1, false), (3, true)]);
    }

    #[test]
    fn distinct_q_examples() {
        assert!(distinct_q(&[]).is_empty());
        let a = QSentence::from_bits(1, 3);
        let b = QSentence::from_bits(2, 3);
        let pool = [
            EvidenceItem { entity_id: 1, q: a },
            EvidenceItem { entity_id: 2, q: b },
            EvidenceItem { entity_id: 3, q: a },
        ];
        assert_eq!(distinct_q(&pool).len(), 2);
    }

    proptest! {
        #[test]
        fn distinct_q_matches_pairwise_count(bits in proptest::collection::vec(0u64..16, 8)) {
            let pool: Vec<_> = bits.iter().enumerate().map(|(i, &b)| EvidenceItem {
                entity_id: i as u32,
                q: QSentence::from_bits(b, 4),
            }).collect();
            // naive: count items with no earlier equal item
            let naive = (0..pool.len())
                .filter(|&i| (0..i).all(|j| pool[j].q != pool[i].q))
                .count();
            prop_assert_eq!(distinct_q(&pool).len(), naive);
            let mut rev = pool.clone();
            rev.reverse();
            prop_assert_eq!(distinct_q(&rev), distinct_q(&pool));
            let twice: Vec<_> = pool.iter().chain(pool.iter()).copied().collect();
            prop_assert_eq!(distinct_q(&twice), distinct_q(&pool));
        }

        #[test]
        fn dropping_a_constraint_never_breaks_satisfaction(
            bits in 0u64..(1 << 6),
            fixed in proptest::collection::btree_map(0usize..6, any::<bool>(), 2..6),
            drop in any::<proptest::sample::Index>(),
        ) {
            let q = QSentence::from_bits(bits, 6);
            let fixed: Vec<_> = fixed.into_iter().collect();
            let full = Hypothesis::new(0, "f", fixed.clone(), Action::Slow, 6).unwrap();
            let mut fewer = fixed.clone();
            fewer.remove(drop.index(fixed.len()));
            let relaxed = Hypothesis::new(0, "r", fewer, Action::Slow, 6).unwrap();
            if hypothesis_satisfied_by(&q, &full) {
                prop_assert!(hypothesis_satisfied_by(&q, &relaxed));
            }
        }

        #[test]
        fn grounding_is_functional(bits in 0u64..(1 << 10)) {
            let map = build_slot_map(&PredicateVocabulary::traffic_default()).unwrap();
            let q = ground_with(&map, |c, n| {
                let slot = map.slot(c, n).unwrap();
                Some((bits >> slot) & 1 == 1)
            }).unwrap();
            prop_assert_eq!(q.bits(), bits);
        }
    }
}
