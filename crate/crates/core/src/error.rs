use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    /// All mass sits on degree-0 types, so the size-biased law is undefined.
    #[error("degenerate type distribution: no mass on types with positive degree")]
    Degenerate,

    #[error("supercritical state: cascade growth g = {g} >= 1")]
    Supercritical { g: f64 },

    #[error("integration failed at x = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("graph generation failed: {0}")]
    Generation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("verification failed: {0}")]
    Verification(String),

    /// A process invariant failed; this always indicates a bug.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
