use thiserror::Error;

/// Errors raised by the bound, region and gap computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The quantity is not defined for this channel (e.g. a required gain is zero).
    /// Callers that assemble envelopes treat this as `+inf`.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("degenerate channel: singular conditional covariance for {0}")]
    DegenerateChannel(String),

    #[error("signal index {index} out of range ({len} available)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("search space has no feasible point")]
    EmptyFeasibleSet,

    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
