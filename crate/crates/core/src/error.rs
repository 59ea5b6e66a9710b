//! Error type shared across the crate.

use thiserror::Error;

/// Failures surfaced by model fitting, detection, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("grid must be strictly increasing with at least 2 points")]
    InvalidGrid,

    #[error("lag exceeds sample: lag {lag} with {n} observations")]
    LagExceedsSample { lag: i64, n: usize },

    #[error("series too short: length {len}, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("surface not symmetric: max asymmetry {max_asym:.3e}")]
    NotSymmetric { max_asym: f64 },

    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    #[error("insufficient training curves: have {n}, need at least {min}")]
    InsufficientTraining { n: usize, min: usize },

    #[error("insufficient errors for split: length {len}, need at least {min}")]
    InsufficientErrors { len: usize, min: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("window fit failed at training length {gamma}: {source}")]
    WindowFit {
        gamma: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("bootstrap failure rate too high: {failures} of {total} replications failed")]
    BootstrapFailures { failures: usize, total: usize },
}
