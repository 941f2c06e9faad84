use thiserror::Error;

/// Errors raised by the numerical core and the config layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the operation (zero mass,
    /// length mismatch, point too close to the parameter box boundary, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The prior density is non-positive or otherwise unusable.
    #[error("prior error: {0}")]
    Prior(String),

    /// A configuration value is invalid. `path` is a JSON-style field path.
    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    /// An information matrix is too ill-conditioned to invert.
    #[error("singular information matrix (condition number {condition:.3e})")]
    SingularInformation { condition: f64 },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
