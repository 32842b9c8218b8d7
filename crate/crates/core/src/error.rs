use thiserror::Error;

/// Everything that can go wrong while evaluating sequences, bounds or the oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} is outside the explicit prefix of length {len} and no tail model is declared")]
    IndexOutOfRange { index: u64, len: usize },

    #[error("tail-dependent operation on an explicit sequence without a declared tail model")]
    UnusableTail,

    #[error("sequence is not in l_{r}: the tail sum diverges")]
    Divergent { r: f64 },

    #[error("requested relative precision {rtol:e} not reached within {terms} summed terms")]
    PrecisionNotReached { rtol: f64, terms: u64 },

    #[error("operation requires p {expected} q, got p = {p}, q = {q}")]
    WrongBranch { expected: &'static str, p: f64, q: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("oracle dimension {0} exceeds the hard cap of 3")]
    DimensionTooLarge(usize),

    #[error("grid resolution {resolution} is too coarse for radius {eps}")]
    ResolutionTooCoarse { resolution: f64, eps: f64 },

    #[error("oracle grid would hold {0} cells, above the 1e8 guard")]
    GridTooLarge(u64),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
