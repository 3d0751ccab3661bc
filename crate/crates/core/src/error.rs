use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("an algebra needs at least one basis vector")]
    Empty,
    #[error("expected {expected} {what}, got {got}")]
    Arity { what: &'static str, expected: usize, got: usize },
    #[error("weight q_{index} = {value} is not positive")]
    NonPositiveWeight { index: usize, value: String },
    #[error("weights must be ascending; q_{index} is smaller than its predecessor")]
    UnsortedWeights { index: usize },
    #[error("basis index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("not nilpotent: the lower central series does not vanish within {dim} steps")]
    NotNilpotent { dim: usize },
    #[error("dilation factor must be positive, got {0}")]
    NonPositiveDilation(String),
    #[error("exact dilation needs integer weights, but q_{index} = {value}")]
    NonIntegerWeight { index: usize, value: String },
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed group file: {0}")]
    Schema(String),
    #[error("invalid rational {0:?}")]
    Rational(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("malformed CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("grid axis {axis}: point count {n} must be odd and positive")]
    EvenAxis { axis: usize, n: usize },
    #[error("grid axis {axis}: half-width must be positive and finite")]
    BadHalfWidth { axis: usize },
    #[error("grid has {points} points, above the budget of {budget}")]
    OverBudget { points: usize, budget: usize },
    #[error("grid dimension {got} does not match the algebra dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("the averaged function must have vanishing integral, but |∫f| = {0:e}")]
    NonzeroMean(f64),
    #[error("kernel fails the vanishing-mean condition at t = 0: sup_x |∫f(x,0,v)dv| = {0:e}")]
    NotInIdeal(f64),
    #[error("parameter {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("invalid cutoff plateau [{a}, {b}]: need 0 < a < 1 < b")]
    BadCutoff { a: f64, b: f64 },
    #[error("{0}")]
    Invalid(String),
}
