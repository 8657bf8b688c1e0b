use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid generator spec: {0}")]
    InvalidGenSpec(String),

    /// An exact procedure refused an input that exceeds its state-space or
    /// memory guard. Harnesses treat this as "skip", not as a failure.
    #[error("{what}: size guard exceeded ({actual} > {limit})")]
    SizeGuard {
        what: &'static str,
        limit: u64,
        actual: u64,
    },

    #[error("solver `{solver}` requires {expected} topology, got {got}")]
    Topology {
        solver: &'static str,
        expected: &'static str,
        got: &'static str,
    },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
