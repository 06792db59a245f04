use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration (bad layer spec, bad rate, mismatched shapes at build time).
    #[error("configuration error: {0}")]
    Config(String),

    /// Tensor shape mismatch detected at an operation boundary.
    #[error("shape error: {0}")]
    Shape(String),

    /// The probability matrix has too few frames for the requested label sequence.
    #[error("line too short for label sequence: need at least {needed} frames, got {got}{}",
            line.as_ref().map(|l| format!(" (line {l})")).unwrap_or_default())]
    LineTooShort {
        needed: usize,
        got: usize,
        line: Option<String>,
    },

    /// Brute-force path enumeration refused: instance too large.
    #[error("oracle refused: {paths} paths exceed the {limit} path budget")]
    OracleTooLarge { paths: f64, limit: f64 },

    /// A character is not representable (missing from the font or the codec).
    #[error("unsupported character {ch:?} ({context})")]
    UnsupportedChar { ch: char, context: String },

    /// Input files disagree on line counts.
    #[error("line count mismatch: {path} has {got} lines, expected {expected}")]
    LineCountMismatch {
        path: PathBuf,
        got: usize,
        expected: usize,
    },

    /// Not enough samples to satisfy a split request.
    #[error("insufficient samples: requested {requested}, available {available}")]
    InsufficientSamples { requested: usize, available: usize },

    /// Model file does not start with the expected magic bytes.
    #[error("bad magic in model file {path}")]
    BadMagic { path: PathBuf },

    /// Model file version is not supported by this build.
    #[error("unsupported model file version {version} in {path}")]
    UnsupportedVersion { version: u32, path: PathBuf },

    /// Model file ended before all declared records were read.
    #[error("truncated file {path}: {context}")]
    Truncated { path: PathBuf, context: String },

    /// Malformed content in an otherwise readable file.
    #[error("corrupt file {path}: {context}")]
    Corrupt { path: PathBuf, context: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
