use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("io error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed row in {file}, line {line}, field `{field}`: {message}")]
    Malformed {
        file: String,
        line: u64,
        field: String,
        message: String,
    },

    #[error("value out of range in {file}, line {line}, field `{field}`: {value} not in [0, 1]")]
    ValueOutOfRange {
        file: String,
        line: u64,
        field: String,
        value: f64,
    },

    #[error("label out of range in {file}, line {line}, field `label`: {label} >= {classes}")]
    LabelOutOfRange {
        file: String,
        line: u64,
        label: usize,
        classes: usize,
    },

    #[error("invalid dataset metadata: {0}")]
    InvalidMeta(String),

    #[error("shape mismatch: expected {expected:?} (T, V), got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("class {0} has no training instances")]
    EmptyClass(usize),

    #[error("invalid oracle output: {0}")]
    InvalidPrediction(String),

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("dual swap impossible: {0}")]
    DualSwapImpossible(String),

    #[error("unknown instance id `{0}`")]
    UnknownInstance(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
