//! Parameter sweeps, model/simulator comparison and power budget search for
//! IMDD links built on `imdd-core`.

pub mod config;
pub mod emit;
pub mod error;
pub mod sensitivity;
pub mod sweep;

pub use config::{ConfigDoc, LinkConfig, ENV_PREFIX, HD_FEC_BER, SD_FEC_BER};
pub use emit::{emit, emit_to_path, Format};
pub use error::{Result, SweepError};
pub use sensitivity::{sensitivity_search, Sensitivity};
pub use sweep::{run_sweep, Axis, Field, Mode, SweepRecord, SweepSpec};

/// Axes the `pon` command sweeps when none are given: ER 3/6 dB at the HD and SD FEC thresholds.
pub fn pon_default_axes() -> Vec<Axis> {
    vec![
        Axis { key: "modulation.er_db".into(), values: vec![toml::Value::Float(3.0), toml::Value::Float(6.0)] },
        Axis {
            key: "sensitivity.target_ber".into(),
            values: vec![toml::Value::Float(HD_FEC_BER), toml::Value::Float(SD_FEC_BER)],
        },
    ]
}
