//! Receiver sensitivity by bisection on the analytic BER.

use crate::config::LinkConfig;
use crate::error::{Result, SweepError};

/// Bisection stops once the bracket is this narrow.
pub const POWER_TOLERANCE_DB: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity {
    /// Lowest average received power meeting the target BER.
    pub sensitivity_dbm: f64,
    /// Launch power minus sensitivity.
    pub opb_db: f64,
    /// Model BER at the sensitivity.
    pub ber: f64,
}

/// Model BER with the ODN loss set so the average received power is `p_rx_dbm`.
pub fn ber_at(cfg: &LinkConfig, p_rx_dbm: f64) -> Result<f64> {
    let mut c = cfg.clone();
    c.channel.loss_db = cfg.modulation.p_tx_dbm - p_rx_dbm;
    let r = c.link()?.evaluate_default()?;
    match cfg.sensitivity.equalizer.as_str() {
        "ffe" => Ok(r.ber_ffe),
        "dfe" => Ok(r.ber_dfe),
        other => Err(SweepError::Config(format!("sensitivity.equalizer: unknown value {other:?}"))),
    }
}

/// Searches `[p_rx_min_dbm, min(p_rx_max_dbm, p_tx_dbm)]`, assuming BER falls with power.
pub fn sensitivity_search(cfg: &LinkConfig) -> Result<Sensitivity> {
    let s = &cfg.sensitivity;
    let target = s.target_ber;
    if !(target > 0.0 && target < 0.5) {
        return Err(SweepError::Config(format!("sensitivity.target_ber must lie in (0, 0.5), got {target}")));
    }
    let (mut lo, mut hi) = (s.p_rx_min_dbm, s.p_rx_max_dbm.min(cfg.modulation.p_tx_dbm));
    if !(lo < hi) {
        return Err(SweepError::Config(format!("empty received power range [{lo}, {hi}] dBm")));
    }
    let (ber_lo, mut ber_hi) = (ber_at(cfg, lo)?, ber_at(cfg, hi)?);
    if !(ber_lo > target && ber_hi <= target) {
        return Err(SweepError::NotBracketed { target, p_low: lo, p_high: hi, ber_low: ber_lo, ber_high: ber_hi });
    }
    while hi - lo > POWER_TOLERANCE_DB {
        let mid = 0.5 * (lo + hi);
        let b = ber_at(cfg, mid)?;
        if b > target {
            lo = mid;
        } else {
            hi = mid;
            ber_hi = b;
        }
    }
    Ok(Sensitivity { sensitivity_dbm: hi, opb_db: cfg.modulation.p_tx_dbm - hi, ber: ber_hi })
}
