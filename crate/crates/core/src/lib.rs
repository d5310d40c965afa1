//! Goal-oriented semantic evidence selection.
//!
//! * [`logic`]: predicate vocabulary, Q-sentences, goal hypotheses.
//! * [`oracle`]: exact inductive probabilities, by enumeration and closed form.
//! * [`selection`]: budgeted subset selection by lexicographic key, and the
//!   uniform-random baseline.
//! * [`sim`]: deterministic grid-world traffic simulator with rule sets.
//! * [`comms`]: sensor / single-zone / multi-zone downlink architectures.
//! * [`metrics`]: H-DSR / A-DSR against the full-information baseline, sweeps.
//! * [`validation`]: selection key versus exact objective on random instances.
//! * [`config`]: TOML run configuration.

pub mod comms;
pub mod config;
pub mod error;
pub mod logic;
pub mod metrics;
pub mod oracle;
pub mod selection;
pub mod sim;
pub mod validation;

pub use error::{Error, Result};
