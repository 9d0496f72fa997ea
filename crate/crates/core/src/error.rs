use thiserror::Error;

use crate::basis::BasisSpec;

pub type Result<T> = std::result::Result<T, FlrdError>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum FlrdError {
    #[error("basis dimension {k} is too small for degree {degree} (need k >= degree + 1)")]
    InvalidDimension { k: usize, degree: usize },

    #[error("domain [{a}, {b}] is degenerate: lower bound must be strictly below upper bound")]
    InvalidDomain { a: f64, b: f64 },

    #[error("point {t} lies outside the basis domain [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },

    #[error("Gram matrix is not positive definite: leading minor {minor} has non-positive pivot {pivot:e}")]
    SingularGram { minor: usize, pivot: f64 },

    #[error("smoothing is underdetermined: {points} sample points for {k} basis functions")]
    Underdetermined { points: usize, k: usize },

    #[error("smoothing design is rank deficient: rank {rank} < {k}")]
    RankDeficient { rank: usize, k: usize },

    #[error("operation requires spline degree >= 1, basis has degree {0}")]
    UnsupportedDegree(usize),

    #[error("basis mismatch: expected {expected}, found {found}")]
    BasisMismatch { expected: BasisSpec, found: BasisSpec },

    #[error("dataset is empty")]
    EmptyData,

    #[error("dataset must be centered before computing covariances")]
    NotCentered,

    #[error("penalty {name} must be strictly positive and finite, got {value}")]
    InvalidPenalty { name: &'static str, value: f64 },

    #[error("matrix is not positive semi-definite: minimum eigenvalue {min_eigenvalue:e} below tolerance {tolerance:e}")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },

    #[error("need at least {needed} observations, got {found}")]
    TooFewObservations { needed: usize, found: usize },

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid sampled curve: {0}")]
    InvalidSamples(String),

    #[error("invalid eigenvalue sequence: {0}")]
    InvalidSpectrum(String),

    #[error("invalid penalty grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("malformed model file at line {line}: {message}")]
    ModelFormat { line: usize, message: String },
}

impl FlrdError {
    /// Stable machine-readable tag for the error family.
    pub fn kind(&self) -> &'static str {
        match self {
            FlrdError::InvalidDimension { .. } => "invalid-dimension",
            FlrdError::InvalidDomain { .. } => "invalid-domain",
            FlrdError::OutOfDomain { .. } => "out-of-domain",
            FlrdError::SingularGram { .. } => "singular-gram",
            FlrdError::Underdetermined { .. } => "underdetermined",
            FlrdError::RankDeficient { .. } => "rank-deficient",
            FlrdError::UnsupportedDegree(_) => "unsupported-degree",
            FlrdError::BasisMismatch { .. } => "basis-mismatch",
            FlrdError::EmptyData => "empty-data",
            FlrdError::NotCentered => "must-center",
            FlrdError::InvalidPenalty { .. } => "invalid-penalty",
            FlrdError::NotPsd { .. } => "not-psd",
            FlrdError::TooFewObservations { .. } => "too-few-observations",
            FlrdError::LengthMismatch { .. } => "dimension-mismatch",
            FlrdError::InvalidSamples(_) => "invalid-samples",
            FlrdError::InvalidSpectrum(_) => "invalid-spectrum",
            FlrdError::InvalidGrid(_) => "invalid-grid",
            FlrdError::NonFinite(_) => "non-finite",
            FlrdError::ModelFormat { .. } => "model-format",
        }
    }
}

pub(crate) fn check_penalty(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(FlrdError::InvalidPenalty { name, value })
    }
}
