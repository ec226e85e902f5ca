use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{root} is not a root: |p(root)| = {residual:e}")]
    RootMismatch { root: Complex64, residual: f64 },

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("entry ({row},{col}) has w-degree {degree}, above the limit {limit}")]
    DegreeOverflow {
        row: usize,
        col: usize,
        degree: usize,
        limit: usize,
    },

    /// Positions are 1-indexed.
    #[error("entry ({row},{col}) has a monomial z^{exponent}, but only exponents = {shift} mod {n} are allowed there")]
    NotInAlgebra {
        row: usize,
        col: usize,
        exponent: usize,
        shift: usize,
        n: usize,
    },

    #[error("not locally inner at lambda = {lambda}: generator residual {residual:e}")]
    NotLocallyInner { lambda: Complex64, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable snake_case name of the variant, used in diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RootMismatch { .. } => "root_mismatch",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::DegreeOverflow { .. } => "degree_overflow",
            Error::NotInAlgebra { .. } => "not_in_algebra",
            Error::NotLocallyInner { .. } => "not_locally_inner",
            Error::Precondition(_) => "precondition",
            Error::Json(_) => "json",
        }
    }
}
