use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid switch measure: {0}")]
    InvalidMeasure(String),

    #[error("no uniform measure exists on the integer lamp group")]
    NoUniformMeasure,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// The walk reached (or a query touched) the truncation boundary of a finite window.
    #[error("truncation boundary reached at distance {radius} (vertex {vertex})")]
    Truncation { vertex: usize, radius: u32 },

    #[error("step budget of {budget} steps exhausted")]
    StepBudget { budget: u64 },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
