use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{divisor} does not divide {dividend}")]
    NotDivisible { divisor: String, dividend: String },
    #[error("need n >= 3, got n = {0}")]
    TooFewIndices(usize),
    #[error("invalid column ({0}, {1}, {2}) for this matching field")]
    InvalidColumn(usize, usize, usize),
    #[error("monomial {0} is not a minimal generator of the power")]
    NotAGenerator(String),
    #[error("{0}")]
    ShapeMismatch(String),
    #[error("monomial {monomial} does not have {power} x-, y- and z-variables")]
    Unbalanced { monomial: String, power: usize },
    #[error("decomposition function failed: {0}")]
    Decomposition(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
