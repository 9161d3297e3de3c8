//! Error type shared by all fraccal modules.
//!
//! The variants split into two families that callers usually want to
//! distinguish: *usage* errors (bad arguments, incompatible scheme/solver
//! combinations, malformed input files) and *numeric* errors (singular step
//! matrices, series that fail to converge). The command-line front end maps
//! these to distinct exit codes.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failures the library reports.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function
    /// (for example the gamma function at a non-positive integer).
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid request: bad sizes, out-of-range parameters,
    /// unknown identifiers.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A scheme was paired with a solver that targets a different
    /// evaluation point (shifted vs. unshifted).
    #[error("scheme mismatch: {0}")]
    SchemeMismatch(String),

    /// A linear solve inside a time stepper hit a (numerically) singular
    /// matrix; `step` is the step index at which it happened.
    #[error("singular step matrix at step {step}: {detail}")]
    SingularStep { step: usize, detail: String },

    /// An iterative evaluation stopped before reaching the requested
    /// accuracy; `achieved` is the best estimate produced.
    #[error("accuracy not reached: {detail} (best estimate {achieved:e})")]
    Accuracy { detail: String, achieved: f64 },

    /// Malformed experiment description (flags or problem file).
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure while reading problem files or writing output.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that indicate a bad request rather than a numeric
    /// breakdown; the CLI maps these to exit code 2 and the rest to 3.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::SchemeMismatch(_) | Error::Parse(_)
        )
    }
}
