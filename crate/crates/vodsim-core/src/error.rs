//! Crate-wide error type.

/// Errors surfaced by model evaluation, topology construction and the
/// simulation engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument violates an operation's preconditions.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration value is out of range or inconsistent.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An enumeration was requested beyond its hard size cap.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// The topology is structurally unusable for the requested operation.
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
