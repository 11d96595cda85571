use std::path::PathBuf;

/// Errors produced by the merging pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A map document that does not satisfy the file schema. `location` names
    /// the element id or field that failed.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no coverage cell reaches threshold {threshold}")]
    EmptyRegion { threshold: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the caller's data rather than by the library.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
