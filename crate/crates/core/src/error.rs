use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse grouping used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input data, configuration or file contents.
    Data,
    /// Degenerate data, truncation or kernel domain failures.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular kernel: {0}")]
    Singularity(String),

    #[error("{kind} index {index} out of range 1..={len}")]
    IndexOutOfRange { kind: &'static str, index: usize, len: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("row count mismatch: expected {expected}, found {found}")]
    RowCount { expected: usize, found: usize },

    #[error("mask inconsistent with bistatic angle at (m={m}, n={n}): {reason}")]
    MaskInconsistent { m: usize, n: usize, reason: String },

    #[error("duplicate row for (m={m}, n={n})")]
    DuplicateRow { m: usize, n: usize },

    #[error("unmapped or invalid column: {0}")]
    UnmappedColumn(String),

    #[error("angle {angle_deg} deg does not snap to any {kind} position within 0.5 deg")]
    AngleSnap { kind: &'static str, angle_deg: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Domain(_)
            | Error::Singularity(_)
            | Error::DegenerateData(_)
            | Error::Truncation(_) => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
