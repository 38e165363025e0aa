use thiserror::Error;

/// Errors produced by the analysis chain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("degenerate shape: all Fourier coefficients vanish")]
    DegenerateShape,

    #[error("shape is not in any analytic shape class: {0}")]
    ClassMembership(String),

    #[error("invalid component: {0}")]
    InvalidComponent(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("signal is empty")]
    EmptySignal,

    #[error("signal has zero variance")]
    ZeroVariance,

    #[error("no ridge found: {0}")]
    NoRidge(String),

    #[error("instance too large for reference path: {size} > {max}")]
    InstanceTooLarge { size: usize, max: usize },

    #[error("point (a={a}, b={b}) lies outside the requested scale-time band")]
    OutsideBand { a: f64, b: f64 },

    #[error("event times must be strictly increasing (violation at index {0})")]
    UnorderedEvents(usize),

    #[error("rate curves do not overlap inside the comparison window")]
    NoOverlap,

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed or unusable input data, as opposed
    /// to numerical failures.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Format(_) | Error::Io(_) | Error::EmptySignal | Error::UnorderedEvents(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
