use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("row {row} of W sums to {sum}, not 1")]
    RowNotStochastic { row: usize, sum: f64 },
    #[error("entry ({row}, {col}) of {matrix} is negative or not finite")]
    NegativeEntry {
        matrix: &'static str,
        row: usize,
        col: usize,
    },
    #[error("entry ({row}, {col}) of W exceeds 1")]
    ProbabilityAboveOne { row: usize, col: usize },
    #[error("metric has no positive entry")]
    EmptyMetric,
    #[error("q({x}, {y}) = 0 while W({y}|{x}) > 0")]
    MetricZeroOnSupport { x: usize, y: usize },
    #[error("tilting exponent must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("{what} needs {needed}, budget is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },
    #[error("output {y} is reachable but its metric average is zero")]
    DenominatorZero { y: usize },
    #[error("position {position} is an impossible input/output pair")]
    ImpossiblePair { position: usize },
    #[error("crossovers must satisfy 0 < p' <= p <= 0.5 (got p={p}, p'={p_prime})")]
    OrderingViolated { p: f64, p_prime: f64 },
    #[error("empty distribution")]
    EmptyDistribution,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(&'static str),
    #[error("symbol {symbol} outside alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::RowNotStochastic { .. } => "RowNotStochastic",
            Error::NegativeEntry { .. } => "NegativeEntry",
            Error::ProbabilityAboveOne { .. } => "ProbabilityAboveOne",
            Error::EmptyMetric => "EmptyMetric",
            Error::MetricZeroOnSupport { .. } => "MetricZeroOnSupport",
            Error::NonPositiveAlpha(_) => "NonPositiveAlpha",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::DenominatorZero { .. } => "DenominatorZero",
            Error::ImpossiblePair { .. } => "ImpossiblePair",
            Error::OrderingViolated { .. } => "OrderingViolated",
            Error::EmptyDistribution => "EmptyDistribution",
            Error::InvalidDistribution(_) => "InvalidDistribution",
            Error::SymbolOutOfRange { .. } => "SymbolOutOfRange",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
