use num_complex::Complex64;
use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    /// Survival below the detection floor; the conditional qubit is undefined.
    #[error("undefined qubit: survival {survival:e} below detection floor")]
    UndefinedQubit { survival: f64 },

    #[error("{what} did not converge (last two estimates {previous} and {last})")]
    NonConvergence {
        what: String,
        previous: Complex64,
        last: Complex64,
    },

    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{context}: {source}")]
    AtSweepPoint {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NonConvergence { .. } | Error::UndefinedQubit { .. } => true,
            Error::AtSweepPoint { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
