use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Core(#[from] imdd_core::Error),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown parameter path {0:?}")]
    UnknownKey(String),

    #[error("invalid sweep axis {axis:?}: {reason}")]
    Axis { axis: String, reason: String },

    #[error("sweep has {points} points, above the cap of {cap} (sweep.max_points)")]
    TooManyPoints { points: usize, cap: usize },

    #[error("target BER {target:e} not bracketed: BER is {ber_low:e} at {p_low} dBm and {ber_high:e} at {p_high} dBm")]
    NotBracketed { target: f64, p_low: f64, p_high: f64, ber_low: f64, ber_high: f64 },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, SweepError>;
