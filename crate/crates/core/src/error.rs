use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("dimension {dim} exceeds the limit {max} for this operation")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("phase {index} is not finite ({value})")]
    NonFinitePhase { index: usize, value: f64 },

    #[error("shrinking factor {0} outside (0, 1]")]
    EtaOutOfRange(f64),

    #[error("{what} index {index} outside {lo}..={hi}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        lo: usize,
        hi: usize,
    },

    #[error("vector length {0} is not a perfect cube")]
    NotPerfectCube(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("spectral decomposition has empty support")]
    EmptySupport,

    #[error("derivative has weight only outside the support of the state")]
    SupportMismatch,

    #[error("matrix lacks equal-diagonal/equal-off-diagonal structure (deviation {0:e})")]
    StructureViolation(f64),

    #[error("variance bound routes disagree: closed form {closed}, alternative {other}")]
    BoundMismatch { closed: f64, other: f64 },

    #[error("matrix is singular or not positive definite")]
    Singular,
}
