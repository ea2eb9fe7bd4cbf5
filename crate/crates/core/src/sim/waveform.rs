//! Sample-level transmitter, channel and photodetector.
//!
//! All filtering is circular over the whole block, so the symbol sequence is
//! treated as periodic and no edge symbols are lost.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::link::Link;
use crate::noise::shot_psd;
use crate::scalar::{dft_bin_frequency, Scalar};
use crate::spectra::Response;
use crate::units::{ModulationSpec, NoiseSpec, PhotodiodeSpec};

/// How the fibre is applied to the waveform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CdMode {
    /// Square-root field, all-pass dispersion, square-law detection.
    #[default]
    Field,
    /// Linear cosine response on the intensity.
    SmallSignal,
    /// Fibre ignored; only bandwidth and loss.
    Off,
}

pub fn draw_symbols<R: Rng>(m: usize, n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..m)).collect()
}

fn gaussian<S: Scalar, R: Rng>(rng: &mut R) -> S {
    S::of(rng.sample::<f64, _>(StandardNormal))
}

/// Rectangular NRZ power waveform at `sps` samples per symbol.
pub fn synthesize_tx<S: Scalar>(modulation: &ModulationSpec<S>, symbols: &[usize], sps: usize) -> Result<Vec<S>> {
    let levels = modulation.level_powers();
    if levels[0] < S::zero() {
        return Err(Error::Config(format!("lowest level power is negative ({})", levels[0])));
    }
    let mut out = Vec::with_capacity(symbols.len() * sps);
    for &s in symbols {
        out.extend(std::iter::repeat_n(levels[s], sps));
    }
    Ok(out)
}

/// Adds RIN with per-sample variance (RIN/2)·P(t)²·fs.
pub fn add_rin<S: Scalar, R: Rng>(wave: &mut [S], noise: &NoiseSpec<S>, fs: S, rng: &mut R) {
    let k = noise.rin_coeff() / S::of(2.0) * fs;
    if k == S::zero() {
        return;
    }
    let std = k.sqrt();
    for p in wave.iter_mut() {
        *p += std * p.abs() * gaussian::<S, R>(rng);
    }
}

/// Multiplies the spectrum of `buf` by `h(f)` in place.
pub fn filter_complex<S: Scalar>(buf: &mut [Complex<S>], fs: S, h: impl Fn(S) -> Complex<S>) {
    S::fft(buf);
    let n = buf.len();
    for (k, v) in buf.iter_mut().enumerate() {
        *v = *v * h(dft_bin_frequency(k, n, fs));
    }
    S::ifft(buf);
}

pub fn filter_real<S: Scalar>(x: &[S], fs: S, h: impl Fn(S) -> Complex<S>) -> Vec<S> {
    let mut buf: Vec<Complex<S>> = x.iter().map(|&v| Complex::new(v, S::zero())).collect();
    filter_complex(&mut buf, fs, h);
    buf.into_iter().map(|c| c.re).collect()
}

/// Optical power after the fibre, bandwidth limitation and loss.
pub fn propagate<S: Scalar>(p_tx: &[S], link: &Link<S>, mode: CdMode, fs: S) -> Vec<S> {
    let loss = link.loss_linear();
    let lin = |resp: Response<S>| move |f: S| resp.eval(f) * loss;
    match (mode, link.fiber) {
        (CdMode::SmallSignal, Some(fiber)) => {
            filter_real(p_tx, fs, lin(link.bandwidth.clone().then(Response::CdSmallSignal(fiber))))
        }
        (CdMode::Field, Some(fiber)) => {
            let mut field: Vec<Complex<S>> =
                p_tx.iter().map(|&p| Complex::new(p.max(S::zero()).sqrt(), S::zero())).collect();
            let smf = Response::SmfField(fiber);
            filter_complex(&mut field, fs, |f| smf.eval(f));
            let detected: Vec<S> = field.iter().map(|e| e.norm_sqr()).collect();
            filter_real(&detected, fs, lin(link.bandwidth.clone()))
        }
        _ => filter_real(p_tx, fs, lin(link.bandwidth.clone())),
    }
}

/// Photocurrent and the number of negative power samples clamped to zero.
#[derive(Debug, Clone)]
pub struct Photocurrent<S> {
    pub current: Vec<S>,
    pub clamped: usize,
}

/// i(t) = G·R·P(t) + shot + thermal. Shot noise follows the instantaneous power.
pub fn add_rx_noise<S: Scalar, R: Rng>(
    p_rx: &[S],
    pd: &PhotodiodeSpec<S>,
    noise: &NoiseSpec<S>,
    fs: S,
    rng: &mut R,
) -> Result<Photocurrent<S>> {
    let gr = pd.conversion();
    let shot_per_watt = shot_psd(pd, S::one())? * fs;
    let th_std = (noise.thermal_n0 / S::of(2.0) * fs).sqrt();
    let mut clamped = 0;
    let current = p_rx
        .iter()
        .map(|&p| {
            let p = if p < S::zero() {
                clamped += 1;
                S::zero()
            } else {
                p
            };
            let mut i = gr * p;
            if shot_per_watt > S::zero() {
                i += (shot_per_watt * p).sqrt() * gaussian::<S, R>(rng);
            }
            if th_std > S::zero() {
                i += th_std * gaussian::<S, R>(rng);
            }
            i
        })
        .collect();
    Ok(Photocurrent { current, clamped })
}

/// Normalised DFT of one held NRZ symbol of `sps` samples starting at sample 0.
pub fn held_pulse_response<S: Scalar>(f: S, fs: S, sps: usize) -> Complex<S> {
    let x = S::PI() * f / fs;
    let n = S::of(sps as f64);
    let mag = if x.sin().abs() < S::of(1e-12) {
        S::one()
    } else {
        (n * x).sin() / (n * x.sin())
    };
    Complex::from_polar(mag, -x * (n - S::one()))
}
