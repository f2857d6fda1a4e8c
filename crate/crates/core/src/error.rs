use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("duplicate request id {0}")]
    DuplicateId(u64),

    #[error("invalid request {id}: {reason}")]
    InvalidRequest { id: u64, reason: String },

    #[error("invalid energy model input: {0}")]
    Energy(String),

    #[error("induced velocity solver did not converge (thrust {thrust} N, speed {speed} m/s)")]
    NoConvergence { thrust: f64, speed: f64 },

    #[error("dropped parcel mass {dropped} kg exceeds carried mass {carried} kg")]
    MassUnderflow { carried: f64, dropped: f64 },

    #[error("route violates payload cap: {mass} kg > {cap} kg")]
    PayloadExceeded { mass: f64, cap: f64 },

    #[error("route needs at least two stops, got {0}")]
    RouteTooShort(usize),

    #[error("segmentation: {0}")]
    Segmentation(String),

    #[error("request {0} was already delivered")]
    AlreadyDelivered(u64),

    #[error("request {0} served by more than one route")]
    DoubleService(u64),

    #[error("unknown request {0}")]
    UnknownRequest(u64),

    #[error("plan selection infeasible; uncoverable {uncoverable:?}, conflicting {conflicted:?}")]
    Infeasible {
        /// Customers contained in no feasible plan.
        uncoverable: Vec<u64>,
        /// Customers of drone groups that admit no exact cover.
        conflicted: Vec<u64>,
    },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite loss in update batch {batch}")]
    NonFiniteLoss { batch: usize },

    #[error("{0}")]
    Policy(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
