use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("spectrum error: {0}")]
    Spectrum(String),

    #[error("alias collision under modulus {modulus}: {pairs:?}")]
    AliasCollision {
        modulus: usize,
        /// Colliding coefficient index pairs, truncated to the first few.
        pairs: Vec<(usize, usize)>,
    },

    #[error("degenerate dictionary: column {0} has zero norm")]
    DegenerateDictionary(usize),

    #[error("index out of range: {0}")]
    Range(String),

    #[error("scene generation failed: {0}")]
    Generation(String),

    #[error("SNR is undefined for a tensor with zero signal power")]
    UndefinedSnr,

    #[error("ill-conditioned support: {0}")]
    IllConditioned(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("experiment failed: {failed} of {trials} trials errored (first: {first})")]
    Experiment {
        failed: usize,
        trials: usize,
        first: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
