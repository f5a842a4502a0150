use thiserror::Error;

/// Errors raised by the estimators, models and simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A complex function was evaluated outside its domain (log or negative power of zero).
    #[error("domain error: {0}")]
    Domain(String),

    /// An observation sits exactly on the pole of the generator.
    #[error("sample value at index {index} hits the generator pole x = -alpha")]
    Pole { index: usize },

    /// The requested combination of generator and model lies outside the regime
    /// where the requested quantity exists (integrability, finite variance, ...).
    #[error("regime error: {0}")]
    Regime(String),

    /// Moment equations do not separate the two mixture components.
    #[error("components indistinguishable: {0}")]
    Degenerate(String),

    /// A Monte Carlo trial failed; carries the trial index and the underlying error.
    #[error("trial {index} failed: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn regime(msg: impl Into<String>) -> Self {
        Error::Regime(msg.into())
    }

    /// The innermost error, unwrapping trial context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Trial { source, .. } => source.root(),
            other => other,
        }
    }
}
