use thiserror::Error;

/// Errors raised by the library.
///
/// The variants line up with the CLI exit codes: `Domain` and `Precondition`
/// are usage problems, `Construction` is a failed search, and `Precision`
/// means an enclosure was too wide to decide a comparison.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
