use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// The variants fall into two families: validation problems with the caller's
/// input, and internal-consistency failures where an exact identity that must
/// hold did not. The CLI maps the first family to exit code 1 and the second
/// to exit code 2.
#[derive(Debug, Error)]
pub enum GasketError {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("interior block is not invertible (disconnected or degenerate network)")]
    InteriorNotInvertible,

    #[error("matrix is singular")]
    Singular,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("word is not admissible: letter {position} ({letter}) expected level {expected}")]
    Inadmissible {
        position: usize,
        letter: String,
        expected: u32,
    },

    #[error("enumeration ceiling of {ceiling} nodes exceeded")]
    CeilingExceeded { ceiling: u64 },

    #[error("inconsistent piecewise-harmonic data at vertex {vertex}: {first} vs {second}")]
    InconsistentVertex {
        vertex: String,
        first: String,
        second: String,
    },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl GasketError {
    pub fn validation(msg: impl Into<String>) -> Self {
        GasketError::Validation(msg.into())
    }

    pub fn consistency(msg: impl Into<String>) -> Self {
        GasketError::Consistency(msg.into())
    }

    /// True for failures of an identity that exact arithmetic guarantees.
    pub fn is_internal(&self) -> bool {
        matches!(self, GasketError::Consistency(_))
    }
}

pub type Result<T> = std::result::Result<T, GasketError>;
