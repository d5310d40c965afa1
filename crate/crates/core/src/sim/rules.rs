use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::logic::{hypothesis_satisfied_by, Action, EvidenceItem, Hypothesis, SlotMap};

/// Rule sets shipped with the crate, by name.
pub const BUILTIN_RULE_SETS: [(&str, &str); 4] = [
    (
        "original",
        include_str!("../../data/rulesets/original.toml"),
    ),
    (
        "extended",
        include_str!("../../data/rulesets/extended.toml"),
    ),
    ("spatial", include_str!("../../data/rulesets/spatial.toml")),
    (
        "discriminative",
        include_str!("../../data/rulesets/discriminative.toml"),
    ),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub name: String,
    pub hypotheses: Vec<Hypothesis>,
    /// Highest priority first.
    pub action_priority: Vec<Action>,
    pub default_action: Action,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleSetFile {
    name: String,
    action_priority: Vec<Action>,
    #[serde(default = "default_action")]
    default_action: Action,
    #[serde(rename = "hypothesis")]
    hypotheses: Vec<HypothesisEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HypothesisEntry {
    name: String,
    action: Action,
    /// slot name -> required value
    when: BTreeMap<String, bool>,
}

fn default_action() -> Action {
    Action::Normal
}

impl RuleSet {
    pub fn from_toml_str(text: &str, slots: &SlotMap) -> Result<Self> {
        let file: RuleSetFile =
            toml::from_str(text).map_err(|e| Error::config(format!("rule set: {e}")))?;
        let mut hypotheses = Vec::with_capacity(file.hypotheses.len());
        for (id, entry) in file.hypotheses.into_iter().enumerate() {
            let mut fixed = Vec::with_capacity(entry.when.len());
            for (slot_name, value) in &entry.when {
                let slot = slots.slot_by_name(slot_name).ok_or_else(|| {
                    Error::config(format!(
                        "hypothesis `{}` names unknown predicate `{slot_name}`",
                        entry.name
                    ))
                })?;
                fixed.push((slot, *value));
            }
            hypotheses.push(Hypothesis::new(
                id,
                entry.name,
                fixed,
                entry.action,
                slots.t(),
            )?);
        }
        let rules = RuleSet {
            name: file.name,
            hypotheses,
            action_priority: file.action_priority,
            default_action: file.default_action,
        };
        rules.validate()?;
        Ok(rules)
    }

    pub fn load(path: &Path, slots: &SlotMap) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text, slots)
    }

    pub fn builtin(name: &str, slots: &SlotMap) -> Result<Self> {
        let (_, text) = BUILTIN_RULE_SETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::config(format!("no built-in rule set `{name}`")))?;
        Self::from_toml_str(text, slots)
    }

    fn validate(&self) -> Result<()> {
        if self.hypotheses.is_empty() {
            return Err(Error::config(format!(
                "rule set `{}` has no hypotheses",
                self.name
            )));
        }
        for (i, a) in self.action_priority.iter().enumerate() {
            if self.action_priority[..i].contains(a) {
                return Err(Error::config(format!(
                    "action {a} listed twice in priority"
                )));
            }
        }
        for h in &self.hypotheses {
            if !self.action_priority.contains(&h.action) {
                return Err(Error::config(format!(
                    "hypothesis `{}` triggers {} which is missing from action_priority",
                    h.name, h.action
                )));
            }
        }
        Ok(())
    }
}

/// Hypothesis `i` holds iff some observed pair witnesses it.
pub fn evaluate_hypotheses(evidence: &[EvidenceItem], rules: &RuleSet) -> Vec<bool> {
    rules
        .hypotheses
        .iter()
        .map(|h| evidence.iter().any(|e| hypothesis_satisfied_by(&e.q, h)))
        .collect()
}

/// Highest-priority action among triggered hypotheses, else the default.
pub fn decide_action(truth: &[bool], rules: &RuleSet) -> Action {
    rules
        .action_priority
        .iter()
        .copied()
        .find(|&action| {
            rules
                .hypotheses
                .iter()
                .zip(truth)
                .any(|(h, &fired)| fired && h.action == action)
        })
        .unwrap_or(rules.default_action)
}
