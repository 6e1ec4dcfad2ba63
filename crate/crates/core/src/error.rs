use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulators, estimators, and CLI plumbing.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument falls outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The input is valid but carries no usable signal (zero variance, flat objective, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Circulant embedding stayed indefinite after every allowed doubling.
    #[error("circulant embedding failed: min eigenvalue {min_eigenvalue:e} at size {size}")]
    Embedding { size: usize, min_eigenvalue: f64 },

    /// Fewer change points than requested could be located.
    #[error("found only {} of 3 change points: {found:?}", found.len())]
    ChangePoints { found: Vec<usize> },

    /// A scale interval needed downstream holds too few increments.
    #[error("scale interval {interval} holds {count} increments")]
    SparseInterval { interval: usize, count: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Wraps an error with the pipeline stage that produced it.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI: 2 config, 3 numerical degeneracy, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) => 2,
            Error::Degenerate(_)
            | Error::Embedding { .. }
            | Error::ChangePoints { .. }
            | Error::SparseInterval { .. } => 3,
            Error::Io { .. } => 4,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }

    /// The innermost error, with stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
