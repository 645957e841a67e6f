use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported dimension {n} for {kind}")]
    UnsupportedDimension { kind: String, n: usize },

    #[error("numerical blow-up at t = {time}")]
    NumericalBlowup { time: f64 },

    #[error("synthesis failed for receiver {mode} at t = {time}: {reason}")]
    SynthesisFailure { mode: usize, time: f64, reason: String },

    #[error("fidelity threshold {threshold} unreachable (best {best})")]
    ThresholdUnreachable { threshold: f64, best: f64 },

    #[error("waveguide under-resolved: {given} modes given, {required} required")]
    UnderResolved { required: usize, given: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
