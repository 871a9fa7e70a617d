use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Gamma pole at `s = -n`.
    #[error("gamma pole at s = -{0}")]
    Pole(u64),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("modification not applicable: {0}")]
    NotApplicable(String),

    #[error("coupling hypothesis violated at history {history}: {detail}")]
    HypothesisViolation { history: String, detail: String },

    #[error("statistical estimate unavailable: {0}")]
    Statistical(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
