use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: |a[{row}][{col}] - conj(a[{col}][{row}])| = {deviation:e}")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("matrix is not positive definite: smallest eigenvalue {min_eig:e} is at or below the floor {floor:e}")]
    NotPositiveDefinite { min_eig: f64, floor: f64 },

    #[error("eigensolver did not converge (dimension {dim}, Frobenius norm {norm:e})")]
    EigenNonConvergence { dim: usize, norm: f64 },

    #[error("matrix is numerically singular (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrices {first} and {second} do not commute (commutator norm {norm:e})")]
    NonCommuting {
        first: usize,
        second: usize,
        norm: f64,
    },

    #[error("map is not unital: ||phi(I) - I||_F = {deviation:e}")]
    NotUnital { deviation: f64 },

    #[error("map is not an isometry compression: ||V*V - I||_F = {deviation:e}")]
    NotIsometry { deviation: f64 },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{field}: {source}")]
    Field {
        field: String,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attaches the name of the offending input field.
    pub fn in_field(self, field: impl Into<String>) -> Self {
        Error::Field {
            field: field.into(),
            source: Box::new(self),
        }
    }
}
