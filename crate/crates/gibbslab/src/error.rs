use std::path::PathBuf;

use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Conditioning event carries zero mass. The interval and the log of the
    /// mass actually available on the parent law are preserved so callers can
    /// report exactly what was asked for.
    #[error("conditioning event {interval} has zero mass (available log-mass {available_log_mass})")]
    EmptyCondition {
        interval: String,
        available_log_mass: f64,
    },

    #[error("target mean {target} outside reachable range ({min}, {max})")]
    TargetUnreachable { target: f64, min: f64, max: f64 },

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A coupled run was requested with rate functions that are not
    /// nondecreasing, so the order-preservation contract cannot be given.
    #[error("monotone coupling unavailable: {0}")]
    MonotonicityUnavailable(String),

    /// Two internal routes that must agree disagreed. Always a bug.
    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("family spec error in {path}: {detail}")]
    FamilySpec { path: PathBuf, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
