//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must agree on size (neuron count, dataset count,
    /// pattern length) do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A numeric intermediate became non-finite.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Input is structurally valid but carries no usable signal
    /// (all-zero matrix, empty pattern set, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A configuration or request violates its own constraints.
    #[error("invalid spec: {0}")]
    Spec(String),

    /// A file or document does not match the expected schema.
    #[error("malformed {what}: {detail}")]
    Format { what: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }

    pub fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }

    pub fn format(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Format {
            what: what.into(),
            detail: detail.into(),
        }
    }

    /// True for errors caused by bad user input rather than internal failure.
    /// The CLI maps these to exit code 2.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Dimension(_)
            | Error::DegenerateInput(_)
            | Error::Spec(_)
            | Error::Format { .. } => true,
            Error::Io(e) => e.kind() == std::io::ErrorKind::NotFound,
            Error::Numeric(_) => false,
        }
    }
}
