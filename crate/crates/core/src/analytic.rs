//! Infinite-length MMSE equalizer SNR from the folded spectral SNR.

use crate::error::{domain, Error, Result};
use crate::noise::{link_noise_psd, NoisePsdBreakdown};
use crate::scalar::Scalar;
use crate::spectra::{FrequencyGrid, TransferFunction};
use crate::units::{lin_to_db, symbol_variance, ModulationSpec, NoiseSpec, PhotodiodeSpec};

/// Cap applied to infinite SNR points inside the DFE logarithm.
pub const SNR_LOG_CLAMP: f64 = 1e18;

/// Relative tail mass above which folding is considered truncated.
pub const FOLD_TAIL_TOLERANCE: f64 = 1e-6;

/// SNR(f) on the grid of `noise`. Points with zero noise and nonzero
/// signal are `+inf`; points with neither are 0.
pub fn spectral_snr<S: Scalar>(
    modulation: &ModulationSpec<S>,
    pd: &PhotodiodeSpec<S>,
    h_t: &TransferFunction<S>,
    h_ch: &TransferFunction<S>,
    noise: &NoisePsdBreakdown<S>,
) -> Result<Vec<S>> {
    let grid = noise.grid();
    if h_t.grid() != grid || h_ch.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let m = modulation.cardinality();
    let amp = pd.conversion() * modulation.oma_outer() / S::of(2.0 * (m as f64 - 1.0));
    let pref = symbol_variance::<S>(m)? * modulation.symbol_period() * amp * amp;
    let snr = (0..grid.n_points())
        .map(|i| {
            let mut sig = pref * h_t.values()[i].norm_sqr() * h_ch.values()[i].norm_sqr();
            if let Some(g) = noise.rx_gain() {
                sig *= g[i];
            }
            let n = noise.total[i];
            if sig == S::zero() {
                S::zero()
            } else if n == S::zero() {
                S::infinity()
            } else {
                sig / n
            }
        })
        .collect();
    Ok(snr)
}

/// Folded SNR sampled on `[-Rs/2, Rs/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedSnr<S> {
    pub values: Vec<S>,
    pub symbol_rate: S,
    /// Share of the spectral SNR mass lying in the outermost symbol-rate band of the grid.
    pub tail_fraction: S,
}

impl<S: Scalar> FoldedSnr<S> {
    pub fn frequency(&self, j: usize) -> S {
        let n = self.values.len() - 1;
        self.symbol_rate * (S::of(j as f64 / n as f64) - S::of(0.5))
    }

    pub fn is_truncated(&self) -> bool {
        self.tail_fraction > S::of(FOLD_TAIL_TOLERANCE)
    }

    /// T·∫ g(SNRbar) df by the trapezoid rule.
    fn mean_of(&self, g: impl Fn(S) -> S) -> S {
        let n = self.values.len() - 1;
        let inner: S = self.values.iter().map(|&v| g(v)).sum();
        let ends = (g(self.values[0]) + g(self.values[n])) / S::of(2.0);
        (inner - ends) / S::of(n as f64)
    }
}

/// SNRbar(f) = Σ_μ SNR(f − μ/T), sampled with the grid's resolution.
pub fn fold_snr<S: Scalar>(snr: &[S], grid: &FrequencyGrid<S>, symbol_period: S) -> Result<FoldedSnr<S>> {
    if snr.len() != grid.n_points() {
        return Err(Error::GridMismatch);
    }
    if !(symbol_period > S::zero()) {
        return Err(domain("symbol period must be positive"));
    }
    let rs = S::one() / symbol_period;
    let f_max = grid.f_max();
    if f_max < rs / S::of(2.0) * S::of(1.0 - 1e-9) {
        return Err(Error::GridTooNarrow { needed: (rs / S::of(2.0)).as_f64(), available: f_max.as_f64() });
    }
    let df = grid.df();
    let n_fold = (rs / df).round().to_usize().unwrap_or(0).max(2);
    let last = (grid.n_points() - 1) as f64;

    let sample = |f: S| -> S {
        let pos = ((f + f_max) / df).as_f64();
        if pos < -1e-6 || pos > last + 1e-6 {
            return S::zero();
        }
        let base = pos.round();
        if (pos - base).abs() < 1e-6 {
            return snr[base.clamp(0.0, last) as usize];
        }
        let lo = pos.floor();
        let t = S::of(pos - lo);
        let lo = lo as usize;
        snr[lo] * (S::one() - t) + snr[lo + 1] * t
    };

    let mu_max = (f_max * symbol_period).ceil().to_i64().unwrap_or(0) + 1;
    let values = (0..=n_fold)
        .map(|j| {
            let f = rs * (S::of(j as f64 / n_fold as f64) - S::of(0.5));
            (-mu_max..=mu_max).map(|mu| sample(f - S::of(mu as f64) * rs)).sum()
        })
        .collect();

    let edge = f_max - rs;
    let (mut tail, mut all) = (S::zero(), S::zero());
    for (f, &v) in grid.frequencies().zip(snr) {
        if v.is_finite() {
            all += v;
            if f.abs() > edge {
                tail += v;
            }
        }
    }
    let tail_fraction = if all > S::zero() { tail / all } else { S::zero() };
    Ok(FoldedSnr { values, symbol_rate: rs, tail_fraction })
}

/// Linear-equalizer SNR, 1/(T∫1/(SNRbar+1)) − 1.
pub fn snr_ffe<S: Scalar>(folded: &FoldedSnr<S>) -> S {
    let mean = folded.mean_of(|v| if v.is_infinite() { S::zero() } else { S::one() / (v + S::one()) });
    S::one() / mean - S::one()
}

/// Decision-feedback equalizer SNR, exp(T∫ln(SNRbar+1)) − 1.
pub fn snr_dfe<S: Scalar>(folded: &FoldedSnr<S>) -> S {
    let clamp = S::of(SNR_LOG_CLAMP);
    let mean = folded.mean_of(|v| (v.min(clamp)).ln_1p());
    mean.exp_m1()
}

/// Gray-coded M-PAM bit error rate at linear SNR `snr`.
pub fn ber_from_snr<S: Scalar>(snr: S, m: usize) -> S {
    let mf = m as f64;
    let k = S::of((mf - 1.0) / (mf * mf.log2()));
    let arg = (S::of(3.0) * snr / S::of(2.0 * (mf * mf - 1.0))).sqrt();
    k * arg.erfc()
}

/// FFE and DFE SNR for one noise realisation of the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualizedSnr<S> {
    pub ffe: S,
    pub dfe: S,
    pub tail_fraction: S,
}

pub fn equalized_snr<S: Scalar>(
    modulation: &ModulationSpec<S>,
    pd: &PhotodiodeSpec<S>,
    h_t: &TransferFunction<S>,
    h_ch: &TransferFunction<S>,
    noise: &NoisePsdBreakdown<S>,
) -> Result<EqualizedSnr<S>> {
    let snr = spectral_snr(modulation, pd, h_t, h_ch, noise)?;
    let folded = fold_snr(&snr, noise.grid(), modulation.symbol_period())?;
    Ok(EqualizedSnr { ffe: snr_ffe(&folded), dfe: snr_dfe(&folded), tail_fraction: folded.tail_fraction })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkResult<S> {
    pub snr_ffe_db: S,
    pub snr_dfe_db: S,
    pub per_eye_snr_ffe_db: Vec<S>,
    pub per_eye_snr_dfe_db: Vec<S>,
    pub per_eye_ber_ffe: Vec<S>,
    pub per_eye_ber_dfe: Vec<S>,
    /// Mean of the per-eye BERs.
    pub ber_ffe: S,
    pub ber_dfe: S,
    pub tail_fraction: S,
    pub breakdown: NoisePsdBreakdown<S>,
}

/// Aggregate and per-eye results.
///
/// The aggregate noise uses the average received power for shot noise and
/// the mean square of the transmitted level powers for RIN. Eye `k` uses the
/// midpoint of levels `k` and `k+1` for shot noise and the mean square of
/// those two levels for RIN.
pub fn per_eye_results<S: Scalar>(
    modulation: &ModulationSpec<S>,
    pd: &PhotodiodeSpec<S>,
    noise: &NoiseSpec<S>,
    h_t: &TransferFunction<S>,
    h_ch: &TransferFunction<S>,
    h_rx: Option<&TransferFunction<S>>,
) -> Result<LinkResult<S>> {
    let m = modulation.cardinality();
    let dc = h_ch.at_dc().norm();
    let aggregate = link_noise_psd(
        noise,
        pd,
        modulation.mean_square_power(),
        modulation.avg_power() * dc,
        h_ch,
        h_rx,
    )?;
    let agg = equalized_snr(modulation, pd, h_t, h_ch, &aggregate)?;

    let mut eyes = Vec::with_capacity(m - 1);
    if m == 2 {
        eyes.push(agg);
    } else {
        let centers = modulation.eye_center_powers();
        let squares = modulation.eye_mean_square_powers();
        for (p_mid, p_sq) in centers.into_iter().zip(squares) {
            let b = link_noise_psd(noise, pd, p_sq, p_mid * dc, h_ch, h_rx)?;
            eyes.push(equalized_snr(modulation, pd, h_t, h_ch, &b)?);
        }
    }
    let per_eye_ber_ffe: Vec<S> = eyes.iter().map(|e| ber_from_snr(e.ffe, m)).collect();
    let per_eye_ber_dfe: Vec<S> = eyes.iter().map(|e| ber_from_snr(e.dfe, m)).collect();
    let n_eyes = S::of(eyes.len() as f64);
    Ok(LinkResult {
        snr_ffe_db: lin_to_db(agg.ffe),
        snr_dfe_db: lin_to_db(agg.dfe),
        per_eye_snr_ffe_db: eyes.iter().map(|e| lin_to_db(e.ffe)).collect(),
        per_eye_snr_dfe_db: eyes.iter().map(|e| lin_to_db(e.dfe)).collect(),
        ber_ffe: per_eye_ber_ffe.iter().copied().sum::<S>() / n_eyes,
        ber_dfe: per_eye_ber_dfe.iter().copied().sum::<S>() / n_eyes,
        per_eye_ber_ffe,
        per_eye_ber_dfe,
        tail_fraction: agg.tail_fraction,
        breakdown: aggregate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{pulse_shaping, supergaussian};
    use proptest::prelude::*;

    /// erfc by power series below 2 and Lentz-free backward continued fraction above.
    fn erfc_oracle(x: f64) -> f64 {
        if x < 2.0 {
            let mut term = x;
            let mut sum = x;
            for n in 1..200 {
                term *= -x * x / n as f64;
                sum += term / (2 * n + 1) as f64;
            }
            1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
        } else {
            let mut frac = x;
            for k in (1..400).rev() {
                frac = x + (k as f64 / 2.0) / frac;
            }
            (-x * x).exp() / std::f64::consts::PI.sqrt() / frac
        }
    }

    fn folded_const(v: f64, n: usize) -> FoldedSnr<f64> {
        FoldedSnr { values: vec![v; n], symbol_rate: 1.0, tail_fraction: 0.0 }
    }

    #[test]
    fn ber_values() {
        let b = ber_from_snr(100.0, 4);
        let oracle = 0.375 * erfc_oracle(10f64.sqrt());
        assert!(((b - oracle) / oracle).abs() < 1e-3, "{b} vs {oracle}");
        assert!((b - 2.9e-6).abs() < 0.05e-6);
        assert_eq!(ber_from_snr(0.0, 4), 0.375);
        assert_eq!(ber_from_snr(0.0, 2), 0.5);
        for snr in [0.5, 3.0, 10.0, 40.0] {
            let half = 0.5 * erfc_oracle((snr / 2.0f64).sqrt());
            assert!(((ber_from_snr(snr, 2) - half) / half).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_folded_identities() {
        for s in [0.0, 1.0, 37.5, 1e4] {
            let f = folded_const(s, 65);
            assert!((snr_ffe(&f) - s).abs() <= 1e-9 * s.max(1.0));
            assert!((snr_dfe(&f) - s).abs() <= 1e-9 * s.max(1.0));
        }
    }

    #[test]
    fn infinite_points() {
        let mut v = vec![10.0; 33];
        v[16] = f64::INFINITY;
        let f = FoldedSnr { values: v, symbol_rate: 1.0, tail_fraction: 0.0 };
        let ffe = snr_ffe(&f);
        assert!(ffe.is_finite() && ffe > 10.0);
        assert!(snr_dfe(&f).is_finite());
        let zero_signal = FoldedSnr { values: vec![0.0; 9], symbol_rate: 1.0, tail_fraction: 0.0 };
        assert_eq!(snr_ffe(&zero_signal), 0.0);
    }

    #[test]
    fn fold_without_aliasing_is_identity() {
        let g = FrequencyGrid::<f64>::new(401, 2.0).unwrap();
        let snr: Vec<f64> = g.frequencies().map(|f| if f.abs() < 0.5 { 1.0 + f * f } else { 0.0 }).collect();
        let folded = fold_snr(&snr, &g, 1.0).unwrap();
        assert_eq!(folded.values.len(), 101);
        for (j, &v) in folded.values.iter().enumerate() {
            let f = folded.frequency(j);
            if f.abs() < 0.5 - 1e-9 {
                assert!((v - (1.0 + f * f)).abs() < 1e-12);
            }
        }
        assert_eq!(folded.tail_fraction, 0.0);
    }

    #[test]
    fn fold_of_constant_counts_aliases() {
        // constant c on [-2, 2] with Rs = 1: every fold point collects four copies
        let g = FrequencyGrid::new(401, 2.0).unwrap();
        let folded = fold_snr(&vec![1.0f64; 401], &g, 1.0).unwrap();
        for (j, &v) in folded.values.iter().enumerate() {
            // f = 0 also picks up both grid endpoints at ±2
            let expect = if j == 50 { 5.0 } else { 4.0 };
            assert!((v - expect).abs() < 1e-12, "{j}: {v}");
        }
        assert!(folded.is_truncated());
    }

    #[test]
    fn fold_rejects_narrow_grid() {
        let g = FrequencyGrid::new(101, 0.4).unwrap();
        assert!(matches!(fold_snr(&vec![1.0; 101], &g, 1.0), Err(Error::GridTooNarrow { .. })));
        assert_eq!(fold_snr(&vec![1.0; 7], &g, 1.0), Err(Error::GridMismatch));
    }

    #[test]
    fn sinc_aliases_vanish_at_dc() {
        let t = 1.0;
        let g = FrequencyGrid::new(801, 4.0).unwrap();
        let ht = pulse_shaping(&g, t);
        let snr: Vec<f64> = ht.magnitude_sq();
        let folded = fold_snr(&snr, &g, t).unwrap();
        assert!((folded.values[folded.values.len() / 2] - 1.0).abs() < 1e-12);
    }

    fn table_one(b_over_rs: f64, order: u32) -> LinkResult<f64> {
        let m = ModulationSpec::new(4, 25e9, 1e-3, 6.0).unwrap();
        let pd = PhotodiodeSpec::pin(1.0).unwrap();
        let noise = NoiseSpec::new(2e-19, -140.0).unwrap();
        let g = FrequencyGrid::for_symbol_rate(25e9).unwrap();
        let ht = pulse_shaping(&g, m.symbol_period());
        let hch = supergaussian(&g, b_over_rs * 25e9, order).unwrap();
        per_eye_results(&m, &pd, &noise, &ht, &hch, None).unwrap()
    }

    #[test]
    fn baseline_shape() {
        let r = table_one(0.4, 1);
        assert!(r.snr_dfe_db > r.snr_ffe_db);
        assert_eq!(r.per_eye_snr_ffe_db.len(), 3);
        assert!(r.tail_fraction < FOLD_TAIL_TOLERANCE, "{}", r.tail_fraction);
        assert!(r.ber_ffe > 0.0 && r.ber_ffe <= 0.5);
        // shot and RIN grow with eye power
        assert!(r.per_eye_snr_ffe_db[0] > r.per_eye_snr_ffe_db[1]);
        assert!(r.per_eye_snr_ffe_db[1] > r.per_eye_snr_ffe_db[2]);
    }

    #[test]
    fn monotone_in_bandwidth() {
        let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for b in [0.3, 0.4, 0.6, 0.8, 1.0] {
            let r = table_one(b, 3);
            assert!(r.snr_ffe_db >= prev.0 && r.snr_dfe_db >= prev.1);
            prev = (r.snr_ffe_db, r.snr_dfe_db);
        }
    }

    #[test]
    fn oma_doubling_quadruples_snr() {
        let g = FrequencyGrid::new(201, 50e9).unwrap();
        let pd = PhotodiodeSpec::pin(1.0).unwrap();
        let noise = NoiseSpec::new(2e-19, f64::NEG_INFINITY).unwrap();
        let a = ModulationSpec::from_oma(4, 25e9, 1e-3, 0.5e-3).unwrap();
        let b = ModulationSpec::from_oma(4, 25e9, 1e-3, 1.0e-3).unwrap();
        let ht = pulse_shaping(&g, a.symbol_period());
        let hch = supergaussian(&g, 10e9, 1).unwrap();
        // thermal only, so the noise does not depend on the power
        let nb = link_noise_psd(&noise, &PhotodiodeSpec::new(1.0, 1.0, 1.0).unwrap(), 0.0, 0.0, &hch, None).unwrap();
        let sa = spectral_snr(&a, &pd, &ht, &hch, &nb).unwrap();
        let sb = spectral_snr(&b, &pd, &ht, &hch, &nb).unwrap();
        for (x, y) in sa.iter().zip(&sb) {
            assert!((y - 4.0 * x).abs() <= 1e-12 * y.abs());
        }
        let zero = ModulationSpec::from_oma(4, 25e9, 1e-3, 0.0).unwrap();
        assert!(spectral_snr(&zero, &pd, &ht, &hch, &nb).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pam4_prefactor() {
        // flat unit responses and unit noise at one point: SNR = 5/36·T·OMA²
        let g = FrequencyGrid::<f64>::new(3, 1.0).unwrap();
        let m = ModulationSpec::from_oma(4, 1.0, 1.0, 1.0).unwrap();
        let pd = PhotodiodeSpec::pin(1.0).unwrap();
        let id = TransferFunction::identity(&g);
        let nb = crate::noise::total_noise_psd(&g, vec![1.0; 3], 0.0, vec![0.0; 3], None).unwrap();
        let s = spectral_snr(&m, &pd, &id, &id, &nb).unwrap();
        assert!((s[1] - 5.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn thermal_dominated_eyes_agree() {
        let m = ModulationSpec::new(4, 25e9, 1e-3, 6.0).unwrap();
        let pd = PhotodiodeSpec::pin(1.0).unwrap();
        let noise = NoiseSpec::new(2e-16, f64::NEG_INFINITY).unwrap();
        let g = FrequencyGrid::new(4097, 100e9).unwrap();
        let ht = pulse_shaping(&g, m.symbol_period());
        let hch = supergaussian(&g, 10e9, 1).unwrap();
        let r = per_eye_results(&m, &pd, &noise, &ht, &hch, None).unwrap();
        for e in &r.per_eye_snr_ffe_db {
            assert!((e - r.snr_ffe_db).abs() < 1e-3);
        }
        assert!(r.per_eye_snr_ffe_db[0] > r.per_eye_snr_ffe_db[2]);
    }

    #[test]
    fn ook_single_eye_matches_aggregate() {
        let m = ModulationSpec::new(2, 25e9, 1e-3, 6.0).unwrap();
        let pd = PhotodiodeSpec::pin(1.0).unwrap();
        let noise = NoiseSpec::new(2e-19, -130.0).unwrap();
        let g = FrequencyGrid::new(4097, 100e9).unwrap();
        let ht = pulse_shaping(&g, m.symbol_period());
        let hch = supergaussian(&g, 10e9, 1).unwrap();
        let r = per_eye_results(&m, &pd, &noise, &ht, &hch, None).unwrap();
        assert_eq!(r.per_eye_snr_ffe_db, vec![r.snr_ffe_db]);
        assert_eq!(r.per_eye_ber_dfe, vec![r.ber_dfe]);
        let direct: f64 = ber_from_snr(crate::units::db_to_lin(r.snr_ffe_db), 2);
        assert!(((r.ber_ffe - direct) / direct).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn dfe_dominates_ffe(vals in proptest::collection::vec(0.0f64..1e4, 3..64)) {
            let f = FoldedSnr { values: vals.clone(), symbol_rate: 1.0, tail_fraction: 0.0 };
            let (ffe, dfe) = (snr_ffe(&f), snr_dfe(&f));
            prop_assert!(dfe >= ffe * (1.0 - 1e-12) - 1e-12);
        }

        #[test]
        fn ber_monotone(snr in 0.0f64..200.0, d in 0.01f64..10.0) {
            for m in [2usize, 4, 8, 16] {
                prop_assert!(ber_from_snr(snr + d, m) < ber_from_snr(snr, m) || ber_from_snr(snr, m) == 0.0);
            }
        }

        #[test]
        fn ber_grows_with_cardinality(snr in 1.0f64..200.0) {
            prop_assert!(ber_from_snr(snr, 4) < ber_from_snr(snr, 8));
            prop_assert!(ber_from_snr(snr, 2) < ber_from_snr(snr, 4));
        }
    }
}
