use thiserror::Error;

/// Errors surfaced by the library. Numerical "soft" failures (a gate that is
/// not a c-NOT, a bound that is not satisfied) are reported through result
/// structs, not through this type; `Error` is for rejected inputs.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("unknown product-operator label: {0:?}")]
    UnknownLabel(String),

    #[error("operator is not Hermitian (max |X - X^dag| entry = {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (|X X^dag - 1|_F = {0:.3e})")]
    NotUnitary(f64),

    #[error("perturbation strength alpha = {0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("effective field has zero magnitude")]
    ZeroField,

    #[error("pulse placement {found:?} not valid here (expected {expected:?})")]
    WrongPlacement { expected: String, found: String },

    #[error("standing assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("bound is vacuous for these parameters: {0}")]
    VacuousBound(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("least-squares design matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
