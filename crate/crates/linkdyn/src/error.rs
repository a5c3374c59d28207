//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Invalid schema or configuration file contents.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A value does not conform to its attribute kind.
    #[error("invalid value: {0}")]
    Validation(String),

    #[error("unknown node {node} ({context})")]
    UnknownNode { node: u32, context: String },

    #[error("pair ({u}, {v}) is not an edge of the semester-{semester} snapshot")]
    NotAnEdge { u: u32, v: u32, semester: u16 },

    #[error("semester mismatch: expected {expected}, got {got}")]
    SemesterMismatch { expected: u16, got: u16 },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Dataset or model degeneracy (missing class, no positives, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("argument out of range: {0}")]
    InvalidArgument(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (files, flags, configs),
    /// which map to exit code 2 in the CLI; runtime failures map to 1.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Config(_)
                | Error::Validation(_)
                | Error::InvalidArgument(_)
                | Error::EmptyInput(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
