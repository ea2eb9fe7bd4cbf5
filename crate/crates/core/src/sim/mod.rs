//! Time-domain Monte Carlo reference.
//!
//! A [`Simulator`] draws one symbol block, builds the optical waveform,
//! propagates it, detects it with noise and applies a fixed receiver front
//! end (optional receiver filter followed by a noise-whitened matched
//! filter). Equalizers of any size can then be trained on the same samples
//! with [`Simulator::run`].

pub mod dump;
pub mod equalizer;
pub mod waveform;

use std::path::PathBuf;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::link::Link;
use crate::noise::shot_psd;
use crate::scalar::{dft_bin_frequency, Scalar};
use crate::units::{level_coefficients, lin_to_db};
use equalizer::{residual, solve_regularized, submatrix, Regressors};
pub use waveform::CdMode;

/// Counted BER below this is reported as unreliable.
pub const BER_RELIABILITY_FLOOR: f64 = 1e-5;

/// Fraction of clamped photodetector samples that triggers a warning.
pub const CLAMP_WARN_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TapSpacing {
    /// T/2 feedforward taps.
    #[default]
    HalfSymbol,
    /// T-spaced feedforward taps with a search over the sampling phase.
    Symbol,
}

/// Symbols driving the DFE feedback outside the training block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Feedback {
    #[default]
    Decisions,
    /// Transmitted symbols throughout (full training).
    KnownSymbols,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub samples_per_symbol: usize,
    pub n_symbols: usize,
    pub seed: u64,
    pub ffe_taps: usize,
    /// Feedback taps of the DFE run; 0 disables it.
    pub dfe_feedback_taps: usize,
    pub training_fraction: f64,
    pub cd_mode: CdMode,
    pub tap_spacing: TapSpacing,
    pub feedback: Feedback,
    /// Writes the photocurrent here when set.
    pub dump_path: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            samples_per_symbol: 8,
            n_symbols: 250_000,
            seed: 1,
            ffe_taps: 200,
            dfe_feedback_taps: 30,
            training_fraction: 0.5,
            cd_mode: CdMode::Field,
            tap_spacing: TapSpacing::HalfSymbol,
            feedback: Feedback::Decisions,
            dump_path: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.samples_per_symbol < 4 || !self.samples_per_symbol.is_multiple_of(2) {
            return bad(format!("samples_per_symbol must be even and >= 4, got {}", self.samples_per_symbol));
        }
        if !(self.training_fraction > 0.0 && self.training_fraction < 1.0) {
            return bad(format!("training_fraction must lie in (0, 1), got {}", self.training_fraction));
        }
        if self.ffe_taps == 0 {
            return bad("ffe_taps must be >= 1".into());
        }
        if self.n_symbols < 16 {
            return bad(format!("n_symbols too small: {}", self.n_symbols));
        }
        Ok(())
    }

    pub fn n_training(&self) -> usize {
        ((self.n_symbols as f64 * self.training_fraction).round() as usize).min(self.n_symbols)
    }

    pub fn ffe(&self) -> EqualizerSpec {
        EqualizerSpec { ff_taps: self.ffe_taps, fb_taps: 0, spacing: self.tap_spacing, feedback: self.feedback }
    }

    pub fn dfe(&self) -> Option<EqualizerSpec> {
        (self.dfe_feedback_taps > 0).then_some(EqualizerSpec {
            ff_taps: self.ffe_taps,
            fb_taps: self.dfe_feedback_taps,
            spacing: self.tap_spacing,
            feedback: self.feedback,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EqualizerSpec {
    pub ff_taps: usize,
    pub fb_taps: usize,
    pub spacing: TapSpacing,
    pub feedback: Feedback,
}

impl EqualizerSpec {
    pub fn ffe(ff_taps: usize) -> Self {
        Self { ff_taps, fb_taps: 0, spacing: TapSpacing::HalfSymbol, feedback: Feedback::Decisions }
    }

    pub fn dfe(ff_taps: usize, fb_taps: usize) -> Self {
        Self { fb_taps, ..Self::ffe(ff_taps) }
    }

    pub fn with_feedback(self, feedback: Feedback) -> Self {
        Self { feedback, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult<S> {
    pub snr_mse_db: S,
    pub ber_counted: S,
    pub per_eye_ber: Vec<S>,
    pub ff_taps: Vec<S>,
    pub fb_taps: Vec<S>,
    /// Feedforward taps on the later-sample side of the decision instant.
    pub cursor: isize,
    /// Sampling offset in samples (T-spaced mode only).
    pub phase: isize,
    pub n_bit_errors: u64,
    pub n_symbol_errors: u64,
    pub n_bits: u64,
    pub ber_unreliable: bool,
    pub ridge_increased: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport<S> {
    pub ffe: SimResult<S>,
    pub dfe: Option<SimResult<S>>,
}

pub struct Simulator<S> {
    cfg: SimConfig,
    m: usize,
    symbols: Vec<usize>,
    alpha: Vec<S>,
    y: Vec<S>,
    clamped: usize,
}

fn gray(l: usize) -> usize {
    l ^ (l >> 1)
}

impl<S: Scalar> Simulator<S> {
    pub fn new(link: &Link<S>, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let m = link.modulation.cardinality();
        let sps = cfg.samples_per_symbol;
        let fs = S::of(sps as f64) * link.modulation.symbol_rate();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

        let symbols = waveform::draw_symbols(m, cfg.n_symbols, &mut rng);
        let mut p_tx = waveform::synthesize_tx(&link.modulation, &symbols, sps)?;
        waveform::add_rin(&mut p_tx, &link.noise, fs, &mut rng);
        let p_rx = waveform::propagate(&p_tx, link, cfg.cd_mode, fs);
        drop(p_tx);
        let rx = waveform::add_rx_noise(&p_rx, &link.photodiode, &link.noise, fs, &mut rng)?;
        drop(p_rx);
        if let Some(path) = &cfg.dump_path {
            dump::write_waveform(path, fs, &rx.current)?;
        }
        let y = front_end(link, &rx.current, sps, fs)?;
        let levels = level_coefficients::<S>(m);
        let alpha = symbols.iter().map(|&s| levels[s]).collect();
        Ok(Self { cfg: cfg.clone(), m, symbols, alpha, y, clamped: rx.clamped })
    }

    /// Front-end output, `samples_per_symbol` samples per symbol, symbol `k` centred on sample `k·sps`.
    pub fn received(&self) -> &[S] {
        &self.y
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn clamped_samples(&self) -> usize {
        self.clamped
    }

    pub fn run(&self, eq: &EqualizerSpec) -> Result<SimResult<S>> {
        let sps = self.cfg.samples_per_symbol;
        let n = self.cfg.n_symbols;
        let n_train = self.cfg.n_training();
        if n_train >= n {
            return Err(Error::NoSymbols);
        }
        let dim = eq.ff_taps + eq.fb_taps;
        if n_train <= dim {
            return Err(Error::Config(format!("{n_train} training symbols cannot fit {dim} taps")));
        }
        let step = match eq.spacing {
            TapSpacing::HalfSymbol => sps / 2,
            TapSpacing::Symbol => sps,
        };
        let phases: Vec<isize> = match eq.spacing {
            TapSpacing::HalfSymbol => vec![0],
            TapSpacing::Symbol => (-(sps as isize) / 2..(sps as isize) / 2).collect(),
        };
        let cursors = cursor_candidates(eq.ff_taps, eq.fb_taps);
        let (c_min, c_max) = (cursors[0], *cursors.last().unwrap_or(&0));
        let n_ext = eq.ff_taps + (c_max - c_min) as usize;
        let energy: S = self.alpha[..n_train].iter().map(|a| *a * *a).sum();

        let mut best: Option<(S, isize, isize, Vec<S>, bool)> = None;
        for &phase in &phases {
            let ext = Regressors {
                y: &self.y,
                alpha: &self.alpha,
                sps,
                step,
                phase,
                top: c_max,
                n_ff: n_ext,
                n_fb: eq.fb_taps,
            };
            let g = ext.gram(0, n_train);
            let p = ext.cross(0, n_train);
            let d = ext.dim();
            for &c in &cursors {
                let start = (c_max - c) as usize;
                let idx: Vec<usize> = (start..start + eq.ff_taps).chain(n_ext..n_ext + eq.fb_taps).collect();
                let gs = submatrix(&g, d, &idx);
                let ps: Vec<S> = idx.iter().map(|&i| p[i]).collect();
                let Some((w, grown)) = solve_regularized(&gs, &ps) else { continue };
                let j = residual(&gs, &ps, &w, energy);
                if best.as_ref().is_none_or(|b| j < b.0) {
                    best = Some((j, c, phase, w, grown));
                }
            }
        }
        let (_, cursor, phase, w, grown) =
            best.ok_or_else(|| Error::Config("equalizer normal equations could not be solved".into()))?;
        let reg = Regressors {
            y: &self.y,
            alpha: &self.alpha,
            sps,
            step,
            phase,
            top: cursor,
            n_ff: eq.ff_taps,
            n_fb: eq.fb_taps,
        };
        self.evaluate(&reg, eq, &w, n_train, cursor, phase, grown)
    }

    fn evaluate(
        &self,
        reg: &Regressors<'_, S>,
        eq: &EqualizerSpec,
        w: &[S],
        n_train: usize,
        cursor: isize,
        phase: isize,
        ridge_increased: bool,
    ) -> Result<SimResult<S>> {
        let m = self.m;
        let n = self.cfg.n_symbols;
        let (n_ff, n_fb) = (reg.n_ff, reg.n_fb);
        let ff_out = |k: usize| -> S { (0..n_ff).map(|e| w[e] * reg.value(e, k as isize)).sum() };

        // per-level centroids on the training block, feedback from known symbols
        let mut sum = vec![S::zero(); m];
        let mut count = vec![0usize; m];
        for k in 0..n_train {
            let z = ff_out(k) + (0..n_fb).map(|j| w[n_ff + j] * reg.value(n_ff + j, k as isize)).sum::<S>();
            sum[self.symbols[k]] += z;
            count[self.symbols[k]] += 1;
        }
        let centroids: Vec<S> = (0..m).map(|l| sum[l] / S::of(count[l].max(1) as f64)).collect();
        let thresholds: Vec<S> = centroids.windows(2).map(|c| (c[0] + c[1]) / S::of(2.0)).collect();
        let levels = level_coefficients::<S>(m);

        let mut decided = self.alpha.clone();
        let bits = m.trailing_zeros() as u64;
        let mut err_energy = S::zero();
        let (mut bit_errors, mut sym_errors) = (0u64, 0u64);
        let mut eye_errors = vec![0f64; m - 1];
        for k in n_train..n {
            let fb: S = (0..n_fb).map(|j| w[n_ff + j] * decided[k - j - 1]).sum();
            let z = ff_out(k) + fb;
            let l = thresholds.iter().filter(|&&t| z > t).count();
            if eq.feedback == Feedback::Decisions {
                decided[k] = levels[l];
            }
            let a = self.symbols[k];
            let e = z - centroids[a];
            err_energy += e * e;
            if l != a {
                sym_errors += 1;
                let be = (gray(l) ^ gray(a)).count_ones() as u64;
                bit_errors += be;
                let (lo, hi) = (l.min(a), l.max(a));
                let share = be as f64 / (hi - lo) as f64;
                eye_errors[lo..hi].iter_mut().for_each(|v| *v += share);
            }
        }
        let n_eval = n - n_train;
        let n_bits = n_eval as u64 * bits;
        let mean_c: S = centroids.iter().copied().sum::<S>() / S::of(m as f64);
        let sig: S = centroids.iter().map(|c| (*c - mean_c) * (*c - mean_c)).sum::<S>() / S::of(m as f64);
        let mse = err_energy / S::of(n_eval as f64);
        let snr = if mse > S::zero() { sig / mse } else { S::infinity() };
        let ber = bit_errors as f64 / n_bits as f64;

        let mut warnings = Vec::new();
        let clamp_frac = self.clamped as f64 / self.y.len() as f64;
        if clamp_frac > CLAMP_WARN_FRACTION {
            warnings.push(format!("{:.2}% of photodetector samples clamped to zero power", 100.0 * clamp_frac));
        }
        if ridge_increased {
            warnings.push("normal equations ill-conditioned; ridge increased".into());
        }
        Ok(SimResult {
            snr_mse_db: lin_to_db(snr),
            ber_counted: S::of(ber),
            per_eye_ber: eye_errors.iter().map(|e| S::of(e * (m - 1) as f64 / n_bits as f64)).collect(),
            ff_taps: w[..n_ff].to_vec(),
            fb_taps: w[n_ff..].to_vec(),
            cursor,
            phase,
            n_bit_errors: bit_errors,
            n_symbol_errors: sym_errors,
            n_bits,
            ber_unreliable: ber < BER_RELIABILITY_FLOOR,
            ridge_increased,
            warnings,
        })
    }
}

/// Cursor positions tried during training.
fn cursor_candidates(ff_taps: usize, fb_taps: usize) -> Vec<isize> {
    let k = ff_taps as isize;
    if ff_taps <= 16 {
        return (0..k).collect();
    }
    let mut c: Vec<isize> = if fb_taps == 0 {
        [-8, -4, 0, 4, 8].iter().map(|d| k / 2 + d).collect()
    } else {
        [0.6, 0.7, 0.8, 0.9].iter().map(|f| (f * (k - 1) as f64).round() as isize).collect()
    };
    c.retain(|&x| (0..k).contains(&x));
    c.dedup();
    c
}

/// Receiver filter, then conj(H_T·H_ch·H_RX)/(PSD·|H_RX|²) with the DC bin removed.
///
/// The output is scaled so that a unit level coefficient produces a unit
/// sample at the decision instant.
fn front_end<S: Scalar>(link: &Link<S>, current: &[S], sps: usize, fs: S) -> Result<Vec<S>> {
    let h_ch = link.channel_response();
    let rx = link.rx_filter.clone();
    let gr = link.photodiode.conversion();
    let thermal = link.noise.thermal_n0 / S::of(2.0);
    let shot = shot_psd(&link.photodiode, link.received_power())?;
    let rin = link.noise.rin_coeff() / S::of(2.0) * link.modulation.mean_square_power() * gr * gr;

    let mut buf: Vec<Complex<S>> = current.iter().map(|&v| Complex::new(v, S::zero())).collect();
    S::fft(&mut buf);
    let n = buf.len();
    // response to one held pulse of amplitude G·R·level_step at the decision instant
    let pulse = gr * link.modulation.level_step() * S::of(sps as f64);
    let mut cursor = S::zero();
    let mut filt = Vec::with_capacity(n);
    for k in 0..n {
        let f = dft_bin_frequency(k, n, fs);
        let hc = h_ch.eval(f);
        let hr = rx.as_ref().map_or(Complex::new(S::one(), S::zero()), |r| r.eval(f));
        let psd = thermal + shot + rin * hc.norm_sqr();
        let psd = if psd > S::zero() { psd } else { S::one() };
        let g_rx = hr.norm_sqr();
        let tx = waveform::held_pulse_response(f, fs, sps) * hc;
        let sig = tx * hr;
        let h = if g_rx > S::zero() && k != 0 {
            hr * sig.conj() / (psd * g_rx)
        } else {
            Complex::new(S::zero(), S::zero())
        };
        cursor += (tx * h).re;
        filt.push(h);
    }
    let cursor = cursor * pulse / S::of(n as f64);
    let scale = if cursor > S::zero() { S::one() / cursor } else { S::one() };
    for (v, h) in buf.iter_mut().zip(&filt) {
        *v = *v * *h * scale;
    }
    S::ifft(&mut buf);
    Ok(buf.into_iter().map(|c| c.re).collect())
}

/// FFE and, if configured, DFE results on one shared waveform.
pub fn simulate<S: Scalar>(link: &Link<S>, cfg: &SimConfig) -> Result<SimReport<S>> {
    let sim = Simulator::new(link, cfg)?;
    let ffe = sim.run(&cfg.ffe())?;
    let dfe = cfg.dfe().map(|eq| sim.run(&eq)).transpose()?;
    Ok(SimReport { ffe, dfe })
}
