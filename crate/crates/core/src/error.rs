use std::path::PathBuf;

/// Errors raised by the solvers, problem constructors and the benchmark harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid solver state: {0}")]
    InvalidState(String),

    /// No backtracking step satisfied the acceptance test. Carries the last
    /// trial so the caller can inspect what went wrong.
    #[error("line search failed after {trials} trials (last alpha = {last_alpha:e})")]
    LineSearchFailure {
        trials: usize,
        last_alpha: f64,
        last_z: Vec<f64>,
    },

    /// `F(z) = 0` at the trial point, so the separating hyperplane is undefined.
    #[error("trial point is a zero of the mapping")]
    SolutionFound,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
