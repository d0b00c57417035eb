use std::path::PathBuf;

/// Error type shared by every module of this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A model ingredient (flow, rate, kernel, exit time) is inconsistent.
    #[error("model error: {0}")]
    Model(String),

    /// A basis family is numerically dependent and cannot be orthonormalized.
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),

    /// A state was requested that the trajectory never visits.
    #[error("state {0} was never visited")]
    UnvisitedState(f64),

    /// A transition was requested that the trajectory never observes.
    #[error("transition {from} -> {to} was never observed")]
    UnvisitedPair { from: f64, to: f64 },

    /// An adaptive quadrature failed to reach its tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// A text input (trajectory file, config file, basis name) is malformed.
    #[error("parse error (line {line}): {msg}")]
    Parse { line: usize, msg: String },

    /// Filesystem failure, annotated with the offending path.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
