//! Noise PSD at the equalizer input, in A²/Hz (two-sided).

use crate::error::{domain, Error, Result};
use crate::scalar::{Scalar, ELECTRON_CHARGE};
use crate::spectra::{FrequencyGrid, TransferFunction};
use crate::units::{NoiseSpec, PhotodiodeSpec};

/// Per-point noise PSD components on one grid.
///
/// When a receiver filter is present every component already includes
/// `|H_RX(f)|²`, and the same factor is kept in [`rx_gain`](Self::rx_gain) so
/// the signal path can apply it too.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePsdBreakdown<S> {
    grid: FrequencyGrid<S>,
    pub thermal: Vec<S>,
    pub shot: Vec<S>,
    pub rin: Vec<S>,
    pub total: Vec<S>,
    rx_gain: Option<Vec<S>>,
}

impl<S: Scalar> NoisePsdBreakdown<S> {
    pub fn grid(&self) -> &FrequencyGrid<S> {
        &self.grid
    }

    /// `|H_RX(f)|²` applied to the noise, if a receiver filter was given.
    pub fn rx_gain(&self) -> Option<&[S]> {
        self.rx_gain.as_deref()
    }
}

pub fn thermal_psd<S: Scalar>(noise: &NoiseSpec<S>, grid: &FrequencyGrid<S>) -> Vec<S> {
    vec![noise.thermal_n0 / S::of(2.0); grid.n_points()]
}

/// 2·G²·F·q·R·P for received average power `p_rx`.
pub fn shot_psd<S: Scalar>(pd: &PhotodiodeSpec<S>, p_rx: S) -> Result<S> {
    if p_rx.is_nan() || p_rx < S::zero() {
        return Err(domain(format!("received power must be >= 0, got {p_rx}")));
    }
    Ok(S::of(2.0 * ELECTRON_CHARGE) * pd.gain * pd.gain * pd.excess_noise * pd.responsivity * p_rx)
}

/// (RIN/2)·P²·(G·R)²·|H_ch(f)|² for transmitted power `p_tx`.
pub fn rin_psd_at_equalizer<S: Scalar>(
    noise: &NoiseSpec<S>,
    pd: &PhotodiodeSpec<S>,
    p_tx: S,
    h_ch: &TransferFunction<S>,
) -> Vec<S> {
    rin_psd_mean_square(noise, pd, p_tx * p_tx, h_ch)
}

/// RIN PSD for a signal whose instantaneous power has mean square `p_sq`.
pub fn rin_psd_mean_square<S: Scalar>(
    noise: &NoiseSpec<S>,
    pd: &PhotodiodeSpec<S>,
    p_sq: S,
    h_ch: &TransferFunction<S>,
) -> Vec<S> {
    let gr = pd.conversion();
    let k = noise.rin_coeff() / S::of(2.0) * p_sq * gr * gr;
    h_ch.values().iter().map(|h| k * h.norm_sqr()).collect()
}

/// Sums the three sources and applies an optional receiver filter to all of them.
pub fn total_noise_psd<S: Scalar>(
    grid: &FrequencyGrid<S>,
    thermal: Vec<S>,
    shot: S,
    rin: Vec<S>,
    h_rx: Option<&TransferFunction<S>>,
) -> Result<NoisePsdBreakdown<S>> {
    let n = grid.n_points();
    if thermal.len() != n || rin.len() != n {
        return Err(Error::GridMismatch);
    }
    let mut shot = vec![shot; n];
    let (mut thermal, mut rin) = (thermal, rin);
    let rx_gain = match h_rx {
        Some(h) => {
            if h.grid() != grid {
                return Err(Error::GridMismatch);
            }
            let g = h.magnitude_sq();
            for comp in [&mut thermal, &mut shot, &mut rin] {
                comp.iter_mut().zip(&g).for_each(|(v, g)| *v *= *g);
            }
            Some(g)
        }
        None => None,
    };
    let total = (0..n).map(|i| thermal[i] + shot[i] + rin[i]).collect();
    Ok(NoisePsdBreakdown { grid: *grid, thermal, shot, rin, total, rx_gain })
}

/// Noise at the equalizer for a link whose transmitted power has mean square
/// `p_tx_sq` and whose received average power is `p_rx`.
pub fn link_noise_psd<S: Scalar>(
    noise: &NoiseSpec<S>,
    pd: &PhotodiodeSpec<S>,
    p_tx_sq: S,
    p_rx: S,
    h_ch: &TransferFunction<S>,
    h_rx: Option<&TransferFunction<S>>,
) -> Result<NoisePsdBreakdown<S>> {
    let grid = h_ch.grid();
    total_noise_psd(
        grid,
        thermal_psd(noise, grid),
        shot_psd(pd, p_rx)?,
        rin_psd_mean_square(noise, pd, p_tx_sq, h_ch),
        h_rx,
    )
}
