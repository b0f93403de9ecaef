use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },

    #[error("exponent at position {position} is not a nonnegative integer")]
    BadExponent { position: usize },

    #[error("division by zero literal at position {position}")]
    DivisionByZeroLiteral { position: usize },

    #[error("division by the zero element")]
    DivisionByZero,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} is not supported (must be 1..={max})", max = crate::scalar::MAX_VARS)]
    UnsupportedDimension(usize),

    #[error("index {index} out of range 1..={dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },

    #[error("pole: denominator vanishes at the evaluation point")]
    Pole,

    #[error("shape error: {0}")]
    Shape(String),

    #[error("mode error: {0}")]
    Mode(String),

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported order {order}: {reason}")]
    UnsupportedOrder { order: usize, reason: String },

    #[error("unknown constraint `{0}`")]
    UnknownConstraint(String),

    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
