use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("example {index} has (near) zero norm and cannot be normalized")]
    ZeroVector { index: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("target dimension {requested} exceeds cap {cap}")]
    Overflow { requested: f64, cap: usize },
    #[error("example {index} projected to (near) zero")]
    ProjectedToZero { index: usize },
    #[error("invalid privacy budget: {0}")]
    InvalidBudget(&'static str),
    #[error("net would contain about {predicted:.3e} centers, cap is {cap}")]
    NetTooLarge { predicted: f64, cap: u64 },
    #[error("no candidates to select from")]
    EmptyCandidates,
    #[error("packing construction failed after {attempts} attempts")]
    PackingFailed { attempts: u64 },
    #[error("rejection sampler acceptance rate {rate:.3e} is below 1e-3")]
    LowAcceptance { rate: f64 },
}

impl Error {
    /// Stable machine-readable name, used by the CLI on stderr.
    pub fn name(&self) -> &'static str {
        match self {
            Error::ZeroVector { .. } => "ZERO_VECTOR",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::EmptyDataset => "EMPTY_DATASET",
            Error::InvalidParameter { .. } => "INVALID_PARAMETER",
            Error::Overflow { .. } => "OVERFLOW",
            Error::ProjectedToZero { .. } => "PROJECTED_TO_ZERO",
            Error::InvalidBudget(_) => "INVALID_BUDGET",
            Error::NetTooLarge { .. } => "NET_TOO_LARGE",
            Error::EmptyCandidates => "EMPTY_CANDIDATES",
            Error::PackingFailed { .. } => "PACKING_FAILED",
            Error::LowAcceptance { .. } => "LOW_ACCEPTANCE",
        }
    }
}

pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidParameter { name, reason }
}
