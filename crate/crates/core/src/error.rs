use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero has no factorization")]
    ZeroFactorization,

    #[error("not a real quadratic field generator: {0}")]
    InvalidField(String),

    #[error("field-tag mismatch: {0} vs {1}")]
    FieldMismatch(u64, u64),

    #[error("non-maximal orders out of scope: discriminant {0} is not fundamental")]
    NonFundamental(String),

    #[error("invalid form: {0}")]
    InvalidForm(String),

    #[error("no Frobenius form for inert prime {0}; σ_p = 1")]
    InertPrime(String),

    #[error("equation has m = 0")]
    ZeroRhs,

    #[error("scan budget exceeded: {0}")]
    ScanBudget(String),

    #[error("memory guard: {0}")]
    MemoryGuard(String),

    #[error("calibration undefined: c_m = 0")]
    ZeroCharacterSum,

    #[error("invalid place combination: {0}")]
    InvalidPlaces(String),

    #[error("table does not specify the archimedean limit for n = {n}, a < 0")]
    UnspecifiedLimit { n: u32 },

    #[error("missing density ratio for prime {0}")]
    MissingRatio(u64),

    #[error("singular matrix")]
    SingularMatrix,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An internal invariant failed; this indicates a bug rather than bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}
