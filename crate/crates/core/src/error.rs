use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fock cutoff must be at least 1, got {0}")]
    InvalidCutoff(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |A - A^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (max |U^dag U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("fock index {index} exceeds cutoff n_max = {n_max}")]
    FockIndexOutOfRange { index: usize, n_max: usize },

    #[error("state has zero norm after {0}")]
    ZeroNorm(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numeric invariant violated: {0}")]
    InvariantViolation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by the numerics rather than by the input description.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::NotUnitary { .. }
                | Error::ZeroNorm(_)
                | Error::InvariantViolation(_)
        )
    }
}
