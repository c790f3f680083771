use thiserror::Error;

/// Errors surfaced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("streams do not share a common nonuniform clock: {0}")]
    ClockMismatch(String),

    #[error("no moment supplied for block {0}")]
    MissingBlockMoment(String),

    #[error("candidate plan has no entry for block signature (n={order}, q={conjugations})")]
    IncompletePlan { order: usize, conjugations: usize },

    #[error("NMSE is undefined when the true value is zero")]
    UndefinedNmse,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed dump file: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
