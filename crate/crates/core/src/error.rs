use thiserror::Error;

use crate::society::RelationshipReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Relationship table is not square or holds non-finite entries.
    #[error("malformed relationship table: {0}")]
    MalformedTable(String),

    #[error("relationship axioms violated: {0}")]
    Axioms(RelationshipReport),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A will strategy emitted a force function the engine cannot accept.
    #[error("strategy violation: {0}")]
    StrategyViolation(String),

    #[error("audit input: {0}")]
    AuditInput(String),

    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("step {step}: {source}")]
    AtStep {
        step: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_step(self, step: u64) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }
}
