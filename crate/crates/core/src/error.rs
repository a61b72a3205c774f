use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty coordinate subset")]
    EmptyCoords,

    #[error("coordinate subsets overlap at coordinate {0}")]
    OverlappingCoords(usize),

    #[error("coordinate {coord} out of range for a distribution with {dims} coordinates")]
    CoordOutOfRange { coord: usize, dims: usize },

    #[error("alphabet mismatch: {0:?} vs {1:?}")]
    AlphabetMismatch(Vec<usize>, Vec<usize>),

    #[error("table of {got} entries does not match alphabet product {expected}")]
    TableSize { expected: usize, got: usize },

    #[error("negative or non-finite probability {value} at index {idx}")]
    InvalidProb { idx: usize, value: f64 },

    #[error("distribution not normalized: sum = {sum}")]
    NotNormalized { sum: f64 },

    #[error("delta {0} outside [0, 1]")]
    DeltaOutOfDomain(f64),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("sequence length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("arity violation: {0}")]
    Arity(String),

    #[error("enumeration of {what} needs {size} entries, cap is {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u64 },

    #[error("sequence is not of the marginal type of the joint type")]
    MarginalMismatch,

    #[error("Newman selection exhausted {retries} retries; worst input {worst_input} failed on a {worst_fraction} fraction of strings (target {target})")]
    RetryLimit { retries: usize, worst_input: usize, worst_fraction: f64, target: f64 },

    #[error("no successful trials to condition on")]
    NoSuccessfulTrials,

    #[error("config error: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
