use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the loaders, transforms, clustering and reporting code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("no records matched the class filter")]
    EmptySelection,

    #[error("ragged series lengths: record {record} has {found} values, expected {expected}")]
    RaggedLengths {
        record: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite input value")]
    NonFiniteInput,

    #[error("training diverged: a weight became non-finite at epoch {epoch}")]
    DivergedTraining { epoch: usize },

    #[error("window must hold exactly {expected} values, got {found}")]
    WindowSize { expected: usize, found: usize },

    #[error("insufficient RMSE history for t={t}: need {needed} values, have {have}")]
    InsufficientHistory {
        t: usize,
        needed: usize,
        have: usize,
    },

    #[error("series too short: {len} points, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("invalid k={k} for {n} series")]
    KTooLarge { k: usize, n: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid initial centroid indices: {0}")]
    InvalidInit(String),

    #[error("silhouette needs at least two clusters")]
    SingleCluster,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("failed to read {path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("failed to write report to {path}: {message}")]
    ReportWriteFailure { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteInput)
    }
}
