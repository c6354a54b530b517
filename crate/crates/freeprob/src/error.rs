use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes, split by who is at fault.
///
/// `Invalid` means a precondition on the inputs was violated and the call was
/// never attempted; `Numeric` means the inputs were admissible but a numerical
/// method could not meet its accuracy contract (mass deficit, lost atoms,
/// non-convergence, overflow). The CLI maps these to exit codes 2 and 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
