use std::path::PathBuf;

/// Errors raised anywhere in the extraction / classification pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("feature extraction error: {0}")]
    Extraction(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("model fit error: {0}")]
    Fit(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("GA generation {generation}: {source}")]
    Generation {
        generation: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("case {case}, permutation {permutation} (seed {seed:#018x}): {source}")]
    Permutation {
        case: u8,
        permutation: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
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

    /// Process exit code for the CLI: 2 configuration, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parameter(_) => 2,
            Error::Io { .. }
            | Error::Decode { .. }
            | Error::Dataset(_)
            | Error::Split(_)
            | Error::Fit(_)
            | Error::Data(_)
            | Error::Dimension { .. } => 3,
            Error::Extraction(_) | Error::Estimation(_) | Error::UndefinedCorrelation(_) => 4,
            Error::Generation { source, .. } | Error::Permutation { source, .. } => {
                source.exit_code()
            }
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Data(e.to_string())
    }
}
