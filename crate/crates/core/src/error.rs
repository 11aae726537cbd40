use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure classes, used by the binary to pick an exit code.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Capacity,
    Accuracy,
    Data,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("atoms {0} and {1} coincide; pair potential is singular")]
    SingularDistance(usize, usize),

    #[error("{atoms} atoms exceed the limit of {limit} for {what}")]
    Capacity {
        atoms: usize,
        limit: usize,
        what: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized (norm² = {norm_sqr})")]
    Normalization { norm_sqr: f64 },

    #[error("Krylov propagation failed to converge (achieved residual {residual:e}, tolerance {tolerance:e})")]
    Accuracy { residual: f64, tolerance: f64 },

    #[error("half-chain bipartition needs an odd rung count, got {0}")]
    BipartitionUndefined(usize),

    #[error("invalid ramp schedule: {0}")]
    Schedule(String),

    #[error("kinematics: {0}")]
    Kinematics(String),

    #[error("line {line}: {reason}")]
    MalformedEvent { line: usize, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. }
            | Error::Schedule(_)
            | Error::BipartitionUndefined(_)
            | Error::Config(_) => ErrorKind::Config,
            Error::Capacity { .. } => ErrorKind::Capacity,
            Error::Accuracy { .. } => ErrorKind::Accuracy,
            Error::SingularDistance(..)
            | Error::DimensionMismatch { .. }
            | Error::Normalization { .. }
            | Error::Kinematics(_)
            | Error::MalformedEvent { .. }
            | Error::Json(_)
            | Error::Csv(_) => ErrorKind::Data,
            Error::Io(_) => ErrorKind::Io,
        }
    }
}
