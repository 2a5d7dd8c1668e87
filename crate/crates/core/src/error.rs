use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("waste factor {0} is below the physical floor of 1")]
    WasteBelowUnity(f64),

    #[error("gain must be positive and finite, got {0}")]
    NonPositiveGain(f64),

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("{what} must lie in (0, 1], got {value}")]
    OutOfUnitInterval { what: &'static str, value: f64 },

    #[error("length mismatch: {left} has {left_len} entries, {right} has {right_len}")]
    LengthMismatch {
        left: &'static str,
        left_len: usize,
        right: &'static str,
        right_len: usize,
    },

    #[error("all weights are zero; nothing to combine")]
    AllZeroWeights,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("{path}: line {line}: {message}")]
    PowerLog {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("base station placement infeasible after {attempts} attempts ({placed} of {wanted} placed)")]
    PlacementInfeasible {
        attempts: u64,
        placed: usize,
        wanted: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
