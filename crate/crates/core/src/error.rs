//! Crate-wide error type.

/// Errors shared by every module in the crate.
///
/// `InvalidArgument`, `DimensionMismatch`, `ModeOutOfRange` and `Parse` are
/// caller mistakes (the CLI maps them to exit code 2); the remaining variants
/// are domain failures discovered at run time (exit code 1).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("mode {mode} out of range 1..={modes}")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("encoder collision: states {first} and {second} map to the same word {word}")]
    EncoderCollision {
        first: String,
        second: String,
        word: String,
    },

    #[error("ladder-product sign map is not affine-linear over GF(2)")]
    SignNotAffine,

    #[error("{0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad caller input rather than a run-time
    /// domain failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::DimensionMismatch(_)
                | Error::ModeOutOfRange { .. }
                | Error::Parse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
