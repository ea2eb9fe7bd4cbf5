use thiserror::Error;

/// Errors raised by the model and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the physical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("transfer functions are sampled on different frequency grids")]
    GridMismatch,

    /// The grid does not reach the frequencies needed for folding.
    #[error("grid too narrow: folding needs |f| up to {needed:.4e} Hz, grid ends at {available:.4e} Hz")]
    GridTooNarrow { needed: f64, available: f64 },

    #[error("invalid simulator configuration: {0}")]
    Config(String),

    #[error("tabulated response: {0}")]
    Table(String),

    #[error("no symbols left to evaluate after the training block")]
    NoSymbols,

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
