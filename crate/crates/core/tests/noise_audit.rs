use imdd_core::sim::waveform::{add_rin, add_rx_noise, draw_symbols, synthesize_tx};
use imdd_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N_SYM: usize = 60_000;
const SPS: usize = 4;

fn conditional_stats(x: &[f64], symbols: &[usize], m: usize) -> Vec<(f64, f64, usize)> {
    (0..m)
        .map(|l| {
            let v: Vec<f64> = symbols
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == l)
                .flat_map(|(k, _)| x[k * SPS..(k + 1) * SPS].iter().copied())
                .collect();
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean, var, v.len())
        })
        .collect()
}

fn within_3_sigma(var: f64, expected: f64, n: usize) -> bool {
    let sigma = expected * (2.0 / (n as f64 - 1.0)).sqrt();
    (var - expected).abs() < 3.0 * sigma
}

#[test]
fn rin_variance_follows_level_power_squared() {
    let m = ModulationSpec::new(4, 56e9, 1e-3, 12.0).unwrap();
    let noise = NoiseSpec::new(0.0, -130.0).unwrap();
    let fs = 56e9 * SPS as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let symbols = draw_symbols(4, N_SYM, &mut rng);
    let mut w = synthesize_tx(&m, &symbols, SPS).unwrap();
    add_rin(&mut w, &noise, fs, &mut rng);
    let stats = conditional_stats(&w, &symbols, 4);
    for (p, &(mean, var, n)) in m.level_powers().iter().zip(&stats) {
        assert!((mean - p).abs() < 1e-3 * p);
        let expected = 1e-13 / 2.0 * p * p * fs;
        assert!(within_3_sigma(var, expected, n), "level {p}: {var} vs {expected}");
    }
    let ratio = stats[3].1 / stats[0].1;
    let p = m.level_powers();
    assert!((ratio / (p[3] / p[0]).powi(2) - 1.0).abs() < 0.1);
}

#[test]
fn shot_and_thermal_variance_per_level() {
    let m = ModulationSpec::new(4, 25e9, 1e-4, 6.0).unwrap();
    let pd = PhotodiodeSpec::apd(0.7, 10.0, 4.3).unwrap();
    let noise = NoiseSpec::new(1e-22, f64::NEG_INFINITY).unwrap();
    let fs = 25e9 * SPS as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let symbols = draw_symbols(4, N_SYM, &mut rng);
    let p_rx = synthesize_tx(&m, &symbols, SPS).unwrap();
    let out = add_rx_noise(&p_rx, &pd, &noise, fs, &mut rng).unwrap();
    assert_eq!(out.clamped, 0);
    let stats = conditional_stats(&out.current, &symbols, 4);
    let q = 1.602_176_634e-19;
    for (p, &(mean, var, n)) in m.level_powers().iter().zip(&stats) {
        assert!((mean / (7.0 * p) - 1.0).abs() < 1e-2);
        let shot = 2.0 * 100.0 * 10f64.powf(0.43) * q * 0.7 * p * fs;
        let thermal = 1e-22 * fs / 2.0;
        assert!(within_3_sigma(var, shot + thermal, n), "level {p}: {var} vs {}", shot + thermal);
    }
}
