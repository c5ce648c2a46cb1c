use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid coefficient field: {0}")]
    InvalidField(String),

    #[error("weighted budget violated: |S| = {used} exceeds k = {budget}")]
    BudgetViolation { budget: f64, used: f64 },

    #[error("emulator calibration failed: target {target:e}, smallest achieved {achieved:e}")]
    CalibrationFailure { target: f64, achieved: f64 },

    #[error("matrix is rank deficient (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("relative error undefined: reference norm is zero")]
    ZeroDenominator,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit status: 3 for numerical failures, 2 for invalid input or configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CalibrationFailure { .. } | Error::RankDeficient { .. } | Error::NonFinite(_) | Error::ZeroDenominator => 3,
            _ => 2,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
