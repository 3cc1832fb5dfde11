use thiserror::Error;

/// Which density-operator invariant failed, and by how much.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityViolation {
    #[error("operator is not Hermitian: max |M - M†| = {deviation:e} (tolerance {tolerance:e})")]
    Hermiticity { deviation: f64, tolerance: f64 },
    #[error("eigenvalue {eigenvalue:e} is below -{tolerance:e}")]
    NegativeEigenvalue { eigenvalue: f64, tolerance: f64 },
    #[error("trace is {trace} (expected 1 within {tolerance:e})")]
    Trace { trace: f64, tolerance: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid operator shape: {0}")]
    InvalidShape(String),

    #[error("invalid density operator: {0}")]
    InvalidDensity(#[from] DensityViolation),

    #[error("operator is not Hermitian (max |A - A†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("not a projector: {0}")]
    InvalidProjector(String),

    #[error("strong measurement must be non-degenerate, projector has rank {rank}")]
    DegenerateProjector { rank: usize },

    #[error("outcome has zero probability (Tr[PρP] = {probability:e})")]
    ZeroProbability { probability: f64 },

    #[error("input operators span rank {rank}, need {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("superoperator equation has no exact solution (residual {residual:e})")]
    NoExactSolution { residual: f64 },

    #[error("time {t} outside [{lo}, {hi}]")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("no evolution superoperator for anchor ({t1}, {t2}) with collapse duration {duration}")]
    UnsupportedAnchor { t1: f64, t2: f64, duration: f64 },

    #[error("orthogonal postselection (|denominator| = {denominator:e})")]
    OrthogonalPostselection { denominator: f64 },

    #[error("both collapse models predict the same averaged weak value {value}")]
    DegenerateScenario { value: f64 },

    #[error("pointer postselection probability vanishes ({probability:e})")]
    VanishingPostselection { probability: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state vector norm {norm} is not 1")]
    NormViolation { norm: f64 },

    #[error("JSON: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
