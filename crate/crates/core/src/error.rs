use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A construction would exceed a configured size limit, or the finite
    /// depth ran out before a required refinement was found.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("invalid address: {0}")]
    Address(String),

    /// The argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-supplied object breaks a documented precondition.
    #[error("contract violated: {0}")]
    Contract(String),

    #[error("insufficient depth at level {level}: {detail}")]
    InsufficientDepth { level: usize, detail: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
