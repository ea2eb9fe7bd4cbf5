//! Post-equalization SNR and BER of M-PAM intensity-modulation direct-detection links.
//!
//! [`analytic`] computes the infinite-length FFE/DFE SNR from the folded
//! spectral SNR. [`sim`] is a Monte Carlo reference that transmits symbols
//! through the same link and trains finite equalizers.

pub mod analytic;
pub mod error;
pub mod link;
pub mod noise;
pub mod scalar;
pub mod sim;
pub mod spectra;
pub mod units;

pub use analytic::{ber_from_snr, fold_snr, per_eye_results, snr_dfe, snr_ffe, spectral_snr, FoldedSnr, LinkResult};
pub use error::{Error, Result};
pub use link::Link;
pub use noise::{rin_psd_at_equalizer, shot_psd, thermal_psd, total_noise_psd, NoisePsdBreakdown};
pub use scalar::{Scalar, ELECTRON_CHARGE, SPEED_OF_LIGHT};
pub use sim::{simulate, CdMode, EqualizerSpec, Feedback, SimConfig, SimReport, SimResult, Simulator, TapSpacing};
pub use spectra::{FiberSpec, FrequencyGrid, Response, Table, TransferFunction};
pub use units::{ModulationSpec, NoiseSpec, PhotodiodeSpec, PulseShape};

pub type Link64 = Link<f64>;
pub type Link32 = Link<f32>;
pub type ModulationSpec64 = ModulationSpec<f64>;
pub type ModulationSpec32 = ModulationSpec<f32>;
pub type LinkResult64 = LinkResult<f64>;
pub type LinkResult32 = LinkResult<f32>;
pub type SimResult64 = SimResult<f64>;
pub type FrequencyGrid64 = FrequencyGrid<f64>;
pub type Response64 = Response<f64>;
