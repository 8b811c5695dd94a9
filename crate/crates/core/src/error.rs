use thiserror::Error;

/// Errors raised by state construction, propagation and the geometric checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Hilbert space dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("state is not normalized: |psi|^2 = {0}")]
    NotNormalized(f64),

    #[error("non-finite amplitude or matrix entry")]
    NonFinite,

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("expectation value has imaginary part {0:e}")]
    ImaginaryExpectation(f64),

    #[error("eigendecomposition failed: {0}")]
    Decomposition(String),

    #[error("invalid parameter grid: {0}")]
    InvalidGrid(String),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error(
        "norm drift {drift:e} in one step exceeds {limit:e}; \
         use at least {required_samples} samples"
    )]
    StepTooCoarse {
        drift: f64,
        limit: f64,
        required_samples: usize,
    },

    #[error("path is not in the parallel-transport gauge")]
    NotTransported,

    #[error("endpoints lie on the same ray (S0 = {s0:e} <= {eps:e}); parameter uncertainty is undefined")]
    CoincidentEndpoints { s0: f64, eps: f64 },

    #[error("invalid split generator: {0}")]
    InvalidSplit(String),

    #[error("eigenvalues {a_i} and {a_j} are degenerate")]
    DegeneratePair { a_i: f64, a_j: f64 },

    #[error(
        "parameter {value} outside the valid range [{min}, {max}{}; orthogonality is reached at {orthogonality}",
        if *.open_end { ")" } else { "]" }
    )]
    OutOfRange {
        value: f64,
        min: f64,
        max: f64,
        open_end: bool,
        orthogonality: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
