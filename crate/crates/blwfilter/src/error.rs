use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the library.
///
/// Every failure is reported through this one type so that callers (and the
/// benchmark binary) can print a single structured line and exit.
#[derive(Debug, Error)]
pub enum Error {
    /// Two tensors or signals that must agree in shape do not.
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// A metric's denominator is zero, so the value does not exist.
    #[error("metric {metric} undefined: {reason}")]
    UndefinedMetric {
        metric: &'static str,
        reason: String,
    },

    /// A statistical procedure was handed fewer samples than it can use.
    #[error("insufficient data for {what}: {detail}")]
    InsufficientData {
        what: &'static str,
        detail: String,
    },

    /// A gradient became NaN or infinite during training.
    #[error("non-finite gradient in parameter {name} at optimizer step {step}")]
    NonFiniteGradient { name: String, step: u64 },

    /// The training loss became NaN or infinite.
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    /// A computation produced NaN or infinity outside of training.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A file did not conform to the format it claims to be.
    #[error("malformed {format} data: {detail}")]
    Format {
        format: &'static str,
        detail: String,
    },

    /// A checkpoint stores parameters for a different architecture.
    #[error("checkpoint holds a {stored} model but {requested} was requested")]
    ModelKindMismatch { stored: String, requested: String },

    /// A named record is absent from the data directory.
    #[error("record {0} not found")]
    MissingRecord(String),

    /// An underlying I/O failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Wrap an I/O error with the path that produced it.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
