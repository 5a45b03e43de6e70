use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("need at least {min} {what}, got {got}")]
    TooSmall { what: &'static str, min: usize, got: usize },

    #[error("{what} exceeds the dense limit of {limit} items (got {got})")]
    TooLarge { what: &'static str, limit: usize, got: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid proximity matrix: {0}")]
    InvalidProximity(String),

    #[error("items {i} and {j} share no observed column")]
    NoSharedColumns { i: usize, j: usize },

    #[error("missing cells are not supported here: {0}")]
    MissingData(String),

    #[error("item {item} has zero variance across its coordinates")]
    ZeroVarianceItem { item: usize },

    #[error("column {column} has zero variance")]
    ZeroVarianceColumn { column: usize },

    #[error("{context}: graph has {} connected components (sizes {sizes:?})", sizes.len())]
    Disconnected { context: String, sizes: Vec<usize> },

    #[error("only {available} non-negative eigenvalues available, {required} dimensions requested")]
    InsufficientRank { available: usize, required: usize },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },
}
