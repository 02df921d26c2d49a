use thiserror::Error;

/// Errors raised by scene ingestion, the tracers and the evaluation harness.
#[derive(Debug, Error)]
pub enum Error {
    /// The scene file could not be parsed as structured text.
    #[error("scene file: {0}")]
    SceneSyntax(String),

    /// A scene element failed validation. `location` names the element.
    #[error("{location}: {message}")]
    InvalidScene { location: String, message: String },

    /// An operation was called outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two snapshot streams that should line up do not.
    #[error("stream mismatch: {0}")]
    StreamMismatch(String),

    /// A numerical or run parameter is unusable.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn scene(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidScene {
            location: location.into(),
            message: message.into(),
        }
    }
}
