use std::io::Write;

use imdd_core::*;

fn table_i(b_over_rs: f64) -> Link64 {
    Link::new(
        ModulationSpec::new(4, 25e9, 1e-3, 6.0).unwrap(),
        PhotodiodeSpec::pin(1.0).unwrap(),
        NoiseSpec::new(2e-19, -140.0).unwrap(),
        Response::supergaussian(b_over_rs * 25e9, 1).unwrap(),
    )
}

fn short(seed: u64) -> SimConfig {
    SimConfig { n_symbols: 60_000, ffe_taps: 40, dfe_feedback_taps: 6, seed, ..SimConfig::default() }
}

#[test]
fn simulator_tracks_model_ffe() {
    let link = table_i(0.5);
    let model = link.evaluate_default().unwrap();
    let sim = simulate(&link, &short(3)).unwrap();
    assert!((model.snr_ffe_db - sim.ffe.snr_mse_db).abs() < 0.15, "{} vs {}", model.snr_ffe_db, sim.ffe.snr_mse_db);
}

#[test]
fn oversampling_does_not_change_result() {
    let link = table_i(0.6);
    let a = simulate(&link, &short(4)).unwrap().ffe.snr_mse_db;
    let b = simulate(&link, &SimConfig { samples_per_symbol: 16, ..short(4) }).unwrap().ffe.snr_mse_db;
    assert!((a - b).abs() < 0.1, "{a} vs {b}");
}

#[test]
fn same_seed_same_result() {
    let link = table_i(0.4);
    let cfg = SimConfig { n_symbols: 20_000, ..short(5) };
    assert_eq!(simulate(&link, &cfg).unwrap(), simulate(&link, &cfg).unwrap());
    let other = simulate(&link, &SimConfig { seed: 6, ..cfg.clone() }).unwrap();
    assert_ne!(simulate(&link, &cfg).unwrap().ffe.snr_mse_db, other.ffe.snr_mse_db);
}

#[test]
fn tabulated_channel_matches_closed_form() {
    let rs = 25e9;
    let b = 0.5 * rs;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("channel.txt");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "# frequency_hz response").unwrap();
    for i in 0..=4000 {
        let freq = i as f64 * 25e6;
        let h = (-(freq / b).powi(2) * std::f64::consts::LN_2 / 2.0).exp();
        writeln!(f, "{freq:.6e} {h:.12e}").unwrap();
    }
    drop(f);
    let table = Table::<f64>::read(&path).unwrap();
    let mut link = table_i(0.5);
    let closed = link.evaluate_default().unwrap();
    link.bandwidth = Response::Tabulated(table);
    let tab = link.evaluate_default().unwrap();
    assert!((closed.snr_ffe_db - tab.snr_ffe_db).abs() < 1e-3);
    assert!((closed.snr_dfe_db - tab.snr_dfe_db).abs() < 1e-3);
}

#[test]
fn single_precision_model_agrees() {
    let l64 = table_i(0.5).evaluate_default().unwrap();
    let l32: Link32 = Link::new(
        ModulationSpec::new(4, 25e9, 1e-3, 6.0).unwrap(),
        PhotodiodeSpec::pin(1.0).unwrap(),
        NoiseSpec::new(2e-19, -140.0).unwrap(),
        Response::supergaussian(0.5 * 25e9, 1).unwrap(),
    );
    let r32 = l32.evaluate_default().unwrap();
    assert!((r32.snr_ffe_db as f64 - l64.snr_ffe_db).abs() < 0.02);
    assert!((r32.snr_dfe_db as f64 - l64.snr_dfe_db).abs() < 0.02);
}
