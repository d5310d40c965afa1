//! TOML run configuration.
//!
//! ```toml
//! seeds = [0, 1, 2]
//! budgets = [0, 1, 2, 3, 4, 5]
//! strategies = ["semantic", "random"]
//! rule_sets = ["original", "rules/custom.toml"]  # built-in name or path
//! # vocabulary = "vocab.toml"                    # default: traffic vocabulary
//! # t = 10                                       # optional check on the slot count
//! # enumeration_cap = 10000000
//! # correlation_k = 3
//!
//! [[scenario]]
//! label = "desk"
//! grid_size = 60
//! cars = 10
//! pedestrians = 4
//! r_fov = 5
//! r_vic = 15
//! steps = 100
//!
//! [[architecture]]
//! kind = "sensor-gna"
//!
//! [[architecture]]
//! kind = "multi-zone-lna"
//! zones = [2, 2]
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::comms::{Architecture, Strategy};
use crate::error::{Error, Result};
use crate::logic::{build_slot_map, PredicateVocabulary, SlotMap};
use crate::metrics::{Scenario, SweepPlan};
use crate::selection::DEFAULT_ENUMERATION_CAP;
use crate::sim::rules::{RuleSet, BUILTIN_RULE_SETS};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seeds: Vec<u64>,
    pub budgets: Vec<usize>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    pub rule_sets: Vec<String>,
    #[serde(default)]
    pub vocabulary: Option<PathBuf>,
    #[serde(default)]
    pub t: Option<usize>,
    #[serde(default = "default_cap")]
    pub enumeration_cap: u64,
    #[serde(default = "default_correlation_k")]
    pub correlation_k: usize,
    #[serde(rename = "scenario")]
    pub scenarios: Vec<Scenario>,
    #[serde(rename = "architecture")]
    pub architectures: Vec<Architecture>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_strategies() -> Vec<Strategy> {
    vec![Strategy::Semantic, Strategy::Random]
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

fn default_correlation_k() -> usize {
    3
}

impl RunConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("run config: {e}")))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn is_builtin(name: &str) -> bool {
        BUILTIN_RULE_SETS.iter().any(|(n, _)| *n == name)
    }

    pub fn validate(&self) -> Result<()> {
        let nonempty = [
            ("seeds", self.seeds.is_empty()),
            ("budgets", self.budgets.is_empty()),
            ("strategies", self.strategies.is_empty()),
            ("rule_sets", self.rule_sets.is_empty()),
            ("scenario", self.scenarios.is_empty()),
            ("architecture", self.architectures.is_empty()),
        ];
        for (name, empty) in nonempty {
            if empty {
                return Err(Error::config(format!("`{name}` must not be empty")));
            }
        }
        for s in &self.scenarios {
            s.validate()?;
            for a in &self.architectures {
                a.validate(s.grid_size)?;
            }
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            if self.scenarios[..i].iter().any(|o| o.label == s.label) {
                return Err(Error::config(format!(
                    "duplicate scenario label `{}`",
                    s.label
                )));
            }
        }
        for r in &self.rule_sets {
            if !Self::is_builtin(r) && !self.resolve(Path::new(r)).is_file() {
                return Err(Error::config(format!(
                    "rule set `{r}` is neither built in nor an existing file"
                )));
            }
        }
        if let Some(v) = &self.vocabulary {
            if !self.resolve(v).is_file() {
                return Err(Error::config(format!(
                    "vocabulary file {} does not exist",
                    v.display()
                )));
            }
        }
        Ok(())
    }

    pub fn slot_map(&self) -> Result<SlotMap> {
        let vocab = match &self.vocabulary {
            Some(p) => PredicateVocabulary::load(&self.resolve(p))?,
            None => PredicateVocabulary::traffic_default(),
        };
        let slots = build_slot_map(&vocab)?;
        if let Some(t) = self.t {
            if t != slots.t() {
                return Err(Error::config(format!(
                    "config expects T = {t} but the vocabulary yields T = {}",
                    slots.t()
                )));
            }
        }
        Ok(slots)
    }

    pub fn load_rule_sets(&self, slots: &SlotMap) -> Result<Vec<RuleSet>> {
        self.rule_sets
            .iter()
            .map(|r| {
                if Self::is_builtin(r) {
                    RuleSet::builtin(r, slots)
                } else {
                    RuleSet::load(&self.resolve(Path::new(r)), slots)
                }
            })
            .collect()
    }

    pub fn plan(&self) -> Result<(SlotMap, SweepPlan)> {
        let slots = self.slot_map()?;
        let rule_sets = self.load_rule_sets(&slots)?;
        let plan = SweepPlan {
            scenarios: self.scenarios.clone(),
            rule_sets,
            architectures: self.architectures.clone(),
            strategies: self.strategies.clone(),
            budgets: self.budgets.clone(),
            seeds: self.seeds.clone(),
            cap: self.enumeration_cap,
        };
        Ok((slots, plan))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        seeds = [0, 1]
        budgets = [0, 1, 2]
        rule_sets = ["original"]

        [[scenario]]
        grid_size = 40
        cars = 4
        pedestrians = 2
        r_fov = 3
        r_vic = 8
        steps = 5

        [[architecture]]
        kind = "sensor-gna"

        [[architecture]]
        kind = "multi-zone-lna"
        zones = [2, 2]
    "#;

    #[test]
    fn parses_with_defaults() {
        let cfg = RunConfig::from_toml_str(BASE, Path::new(".")).unwrap();
        assert_eq!(cfg.strategies, default_strategies());
        assert_eq!(cfg.enumeration_cap, DEFAULT_ENUMERATION_CAP);
        assert_eq!(cfg.scenarios[0].label, "default");
        assert_eq!(cfg.scenarios[0].road_spacing, 10);
        let (slots, plan) = cfg.plan().unwrap();
        assert_eq!(slots.t(), 10);
        assert_eq!(plan.cells().len(), 2 * 2 * 3);
    }

    #[test]
    fn rejects_bad_configs() {
        let dir = Path::new(".");
        let missing = BASE.replace("\"original\"", "\"no/such/file.toml\"");
        assert!(RunConfig::from_toml_str(&missing, dir).is_err());
        let wrong_t = format!("t = 12\n{BASE}");
        let cfg = RunConfig::from_toml_str(&wrong_t, dir).unwrap();
        assert!(cfg.plan().is_err());
        let no_seeds = BASE.replace("seeds = [0, 1]", "seeds = []");
        assert!(RunConfig::from_toml_str(&no_seeds, dir).is_err());
        let negative = BASE.replace("budgets = [0, 1, 2]", "budgets = [-1]");
        assert!(RunConfig::from_toml_str(&negative, dir).is_err());
        let typo = BASE.replace("r_vic", "r_vicinity");
        assert!(RunConfig::from_toml_str(&typo, dir).is_err());
        let inverted = BASE.replace("r_vic = 8", "r_vic = 2");
        assert!(RunConfig::from_toml_str(&inverted, dir).is_err());
    }
}
