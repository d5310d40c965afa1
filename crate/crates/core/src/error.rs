use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("grounding error: no value for predicate `{0}`")]
    MissingPredicate(String),

    #[error("enumeration infeasible: T = {t} exceeds the enumeration bound of {max}")]
    EnumerationInfeasible { t: u32, max: u32 },

    #[error("feasibility error: {0}")]
    Feasibility(String),

    #[error("contradictory evidence: no constituent is compatible")]
    Contradiction,

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
