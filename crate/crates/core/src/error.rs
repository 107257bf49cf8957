//! Error type shared by all analysis modules.

use thiserror::Error;

/// Errors produced by laminate analysis operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A 3x3 Kelvin matrix was too close to singular to invert.
    #[error("singular matrix: |det| = {det:.3e} below threshold {threshold:.3e}")]
    SingularMatrix { det: f64, threshold: f64 },

    /// Material constants violate the admissibility requirements.
    #[error("invalid material '{name}': {reason}")]
    InvalidMaterial { name: String, reason: String },

    /// A file could not be parsed.
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    /// Two materials with different units tags were mixed in one stack.
    #[error("units mismatch: '{expected}' vs '{found}'")]
    UnitsMismatch { expected: String, found: String },

    /// The stacking sequence is structurally invalid.
    #[error("invalid stack: {0}")]
    InvalidStack(String),

    /// An operation that requires identical plies was called on a hybrid stack.
    #[error("operation requires a laminate of identical plies")]
    NotIdenticalPly,

    /// A special-case evaluator was invoked on a laminate outside its hypotheses.
    #[error("case '{case}' not applicable: {reason}")]
    CaseNotApplicable { case: String, reason: String },

    /// An unsupported directional-diagram quantity was requested.
    #[error("unknown quantity '{0}'")]
    UnknownQuantity(String),

    /// Search configuration is invalid.
    #[error("invalid search config: {0}")]
    InvalidSearchConfig(String),

    /// Underlying I/O failure.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
