use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric: |S[{row},{col}] - S[{col},{row}]| = {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("matrix has a non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("requested rank {requested} outside 1..={max}")]
    RankOutOfRange { requested: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigensolver failed to converge after {0} iterations")]
    NoConvergence(usize),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("layer {layer}: entry ({row},{col}) = {value} is not a valid {mode} mean")]
    InvalidProbability {
        layer: usize,
        row: usize,
        col: usize,
        value: f64,
        mode: &'static str,
    },

    #[error("block matrix of layer {layer} is rank deficient (rank {rank} < {k})")]
    RankDeficient { layer: usize, rank: usize, k: usize },

    #[error("cannot form {k} clusters from {n} points")]
    TooManyClusters { k: usize, n: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("label sequences differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("community {community} has zero total degree in layer {layer}")]
    ZeroDegreeCommunity { layer: usize, community: usize },

    #[error("unknown method `{0}` (expected one of dcmase, mean_adj, sos, mase)")]
    UnknownMethod(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
