use thiserror::Error;

/// Errors raised across the crate.
///
/// `AssertionFailed` is reserved for in-flight inequalities that follow from
/// checked hypotheses; seeing it means a bug or a numerically degenerate
/// instance, never bad input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    InvalidVertex { vertex: usize, n: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("graph is not regular (min degree {min}, max degree {max})")]
    NotRegular { min: usize, max: usize },
    #[error("gave up after {0} resampling attempts")]
    ResamplingCapExceeded(usize),
    #[error("decomposition verification failed: {0}")]
    VerificationFailed(String),
    #[error("vertex {0} has no available color")]
    StuckVertex(usize),
    #[error("search exceeded the cap of {0} nodes")]
    CapExceeded(u64),
    #[error("instance has no proper colorings")]
    NoColorings,
    #[error("rejection sampling gave up after {0} attempts")]
    MaxTriesExceeded(usize),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("empty choice set: {0}")]
    EmptyChoiceSet(String),
    #[error("negative surplus R = {0}")]
    NegativeR(i64),
    #[error("assertion failed: {0}")]
    AssertionFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Returns `AssertionFailed` carrying the formatted message unless `cond` holds.
macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::AssertionFailed(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
