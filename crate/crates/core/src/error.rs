use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("N must be a power of radix (N = {n}, k = {k})")]
    InvalidSize { n: usize, k: usize },

    #[error("invalid Clos parameters: {0}")]
    InvalidClos(String),

    #[error("network is already flattened")]
    AlreadyFlattened,

    #[error("transform needs at least {needed} stages, network has {found}")]
    TooFewStages { needed: usize, found: usize },

    #[error("grouped-pairs meta-flatten needs an even number of intermediate stages, found {0}")]
    OddIntermediate(usize),

    #[error("transform not supported for {0} networks")]
    UnsupportedTransform(&'static str),

    #[error("routing policy not supported here: {0}")]
    UnsupportedPolicy(String),

    #[error("terminal index {index} out of range for N = {n}")]
    TerminalOutOfRange { index: usize, n: usize },

    #[error("injection rate {0} outside [0, 1]")]
    RateOutOfRange(f64),

    #[error("message length must be at least one flit")]
    ZeroFlits,

    #[error("normal workload needs sigma > 0, got {0}")]
    NonPositiveSigma(f64),

    #[error("hotspot weights must be positive and non-empty")]
    BadWeights,

    #[error("{}:{line}: {msg}", path.display())]
    TraceParse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
