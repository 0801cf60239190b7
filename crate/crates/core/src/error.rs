use thiserror::Error;

/// Errors raised by the library. Each variant maps to one CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("moment explosion: mu = {mu} is not below the critical moment {mu_star}")]
    Explosion { mu: f64, mu_star: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("invalid model spec field `{field}`: {reason}")]
    Spec { field: String, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn spec(field: &str, reason: impl Into<String>) -> Self {
        Error::Spec {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 1 usage, 2 domain, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Spec { .. } | Error::Json(_) => 1,
            Error::Domain(_) | Error::Explosion { .. } => 2,
            Error::Numeric(_) | Error::Resource(_) | Error::Io(_) => 3,
        }
    }
}
