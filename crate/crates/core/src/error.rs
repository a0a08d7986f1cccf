use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants map onto the harness exit-code contract (see
/// [`crate::harness::ExitCode`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("window error: {0}")]
    Window(String),

    #[error("overflow: {0} exceeds the double-precision range")]
    Overflow(String),

    #[error("negative radicand in {0}")]
    NegativeRadicand(String),

    #[error("stability error: {0}")]
    Stability(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("blow-up: {0}")]
    Blowup(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
