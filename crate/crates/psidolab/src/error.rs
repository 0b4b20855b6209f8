use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PsidoError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("expected a function on {expected}, found {found}")]
    Tag { expected: &'static str, found: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite value at lattice point {index} (coordinates {coords:?})")]
    NonFinite { index: usize, coords: Vec<f64> },
    #[error("resource budget exceeded: {message}; try samples_per_axis <= {suggested_n}")]
    Resource { message: String, suggested_n: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, PsidoError>;
