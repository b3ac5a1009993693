use thiserror::Error;

/// Failures surfaced by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The sample makes the statistic undefined.
    #[error("degenerate sample: {quantity} is zero")]
    Degenerate { quantity: &'static str },

    /// The operation is not defined for the requested model family.
    #[error("unsupported family: {operation} is not available for {family}")]
    Capability {
        operation: &'static str,
        family: String,
    },

    /// A caller-side contract was not met (missing inputs, incomplete plans).
    #[error("contract error: {0}")]
    Contract(String),

    /// Malformed input data.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: u64,
        message: String,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Degenerate { .. } => "degenerate",
            Error::Capability { .. } => "capability",
            Error::Contract(_) => "contract",
            Error::Parse { .. } => "parse",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
