//! Units, M-PAM level bookkeeping and scalar conversions.
//!
//! Optical quantities (average power, OMA, level powers) are kept in watts.
//! Conversion to photocurrent happens only where noise and signal meet, via
//! [`PhotodiodeSpec::conversion`]. Symbols are assumed equiprobable and
//! independent.

use crate::error::{domain, Result};
use crate::scalar::Scalar;

pub fn db_to_lin<S: Scalar>(db: S) -> S {
    S::of(10.0).powf(db / S::of(10.0))
}

pub fn lin_to_db<S: Scalar>(x: S) -> S {
    S::of(10.0) * x.log10()
}

pub fn dbm_to_watts<S: Scalar>(dbm: S) -> S {
    S::of(1e-3) * db_to_lin(dbm)
}

pub fn watts_to_dbm<S: Scalar>(w: S) -> S {
    lin_to_db(w / S::of(1e-3))
}

/// Outer OMA of a signal with average power `p_avg` and outer extinction ratio `er_db`.
///
/// An infinite extinction ratio gives `2·p_avg` (lowest level dark).
pub fn oma_from_power_er<S: Scalar>(p_avg: S, er_db: S) -> Result<S> {
    if !(p_avg > S::zero()) || !p_avg.is_finite() {
        return Err(domain(format!("average power must be positive, got {p_avg}")));
    }
    if er_db.is_nan() || er_db < S::zero() {
        return Err(domain(format!("extinction ratio must be >= 0 dB, got {er_db}")));
    }
    // (er-1)/(er+1) written in 1/er so that er = inf is exact.
    let inv = if er_db.is_infinite() { S::zero() } else { S::one() / db_to_lin(er_db) };
    Ok(S::of(2.0) * p_avg * (S::one() - inv) / (S::one() + inv))
}

/// Variance of the level set {±1, ±3, …, ±(M−1)}: (M²−1)/3.
pub fn symbol_variance<S: Scalar>(m: usize) -> Result<S> {
    if m < 2 {
        return Err(domain(format!("PAM cardinality must be >= 2, got {m}")));
    }
    let m = S::of(m as f64);
    Ok((m * m - S::one()) / S::of(3.0))
}

/// Level coefficients α ∈ {−(M−1), −(M−3), …, M−1}, ascending.
pub fn level_coefficients<S: Scalar>(m: usize) -> Vec<S> {
    (0..m).map(|k| S::of((2 * k) as f64 - (m as f64 - 1.0))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PulseShape {
    #[default]
    RectangularNrz,
}

/// M-PAM intensity modulation on the transmitter side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationSpec<S> {
    cardinality: usize,
    symbol_rate: S,
    avg_power: S,
    extinction_ratio_db: S,
    oma_outer: S,
    pulse: PulseShape,
}

impl<S: Scalar> ModulationSpec<S> {
    /// `cardinality` must be a power of two ≥ 2; powers in watts, rate in baud.
    pub fn new(cardinality: usize, symbol_rate: S, avg_power: S, extinction_ratio_db: S) -> Result<Self> {
        if cardinality < 2 || !cardinality.is_power_of_two() {
            return Err(domain(format!("PAM cardinality must be a power of two >= 2, got {cardinality}")));
        }
        if !(symbol_rate > S::zero()) || !symbol_rate.is_finite() {
            return Err(domain(format!("symbol rate must be positive, got {symbol_rate}")));
        }
        let oma_outer = oma_from_power_er(avg_power, extinction_ratio_db)?;
        Ok(Self {
            cardinality,
            symbol_rate,
            avg_power,
            extinction_ratio_db,
            oma_outer,
            pulse: PulseShape::RectangularNrz,
        })
    }

    /// Builds the spec from an outer OMA instead of an extinction ratio.
    pub fn from_oma(cardinality: usize, symbol_rate: S, avg_power: S, oma_outer: S) -> Result<Self> {
        if !(avg_power > S::zero()) {
            return Err(domain(format!("average power must be positive, got {avg_power}")));
        }
        let two = S::of(2.0);
        if oma_outer < S::zero() || oma_outer > two * avg_power {
            return Err(domain(format!(
                "OMA {oma_outer} W incompatible with average power {avg_power} W"
            )));
        }
        let hi = avg_power + oma_outer / two;
        let lo = avg_power - oma_outer / two;
        let er_db = if lo > S::zero() { lin_to_db(hi / lo) } else { S::infinity() };
        let mut spec = Self::new(cardinality, symbol_rate, avg_power, er_db)?;
        spec.oma_outer = oma_outer;
        Ok(spec)
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.cardinality.trailing_zeros()
    }

    pub fn symbol_rate(&self) -> S {
        self.symbol_rate
    }

    pub fn symbol_period(&self) -> S {
        S::one() / self.symbol_rate
    }

    pub fn avg_power(&self) -> S {
        self.avg_power
    }

    pub fn extinction_ratio_db(&self) -> S {
        self.extinction_ratio_db
    }

    pub fn oma_outer(&self) -> S {
        self.oma_outer
    }

    pub fn pulse_shape(&self) -> PulseShape {
        self.pulse
    }

    /// Power step per unit of level coefficient: OMA/(2(M−1)).
    pub fn level_step(&self) -> S {
        self.oma_outer / S::of(2.0 * (self.cardinality as f64 - 1.0))
    }

    /// Level powers, ascending. Mean is `avg_power`, span is `oma_outer`.
    pub fn level_powers(&self) -> Vec<S> {
        let step = self.level_step();
        level_coefficients::<S>(self.cardinality)
            .into_iter()
            .map(|a| (self.avg_power + step * a).max(S::zero()))
            .collect()
    }

    /// E[P²] over equiprobable levels.
    pub fn mean_square_power(&self) -> S {
        let levels = self.level_powers();
        levels.iter().map(|&p| p * p).sum::<S>() / S::of(levels.len() as f64)
    }

    /// Midpoint power of each of the M−1 eyes, ascending.
    pub fn eye_center_powers(&self) -> Vec<S> {
        let levels = self.level_powers();
        levels.windows(2).map(|w| (w[0] + w[1]) / S::of(2.0)).collect()
    }

    /// Mean of the squared powers of the two levels bounding each eye.
    pub fn eye_mean_square_powers(&self) -> Vec<S> {
        let levels = self.level_powers();
        levels
            .windows(2)
            .map(|w| (w[0] * w[0] + w[1] * w[1]) / S::of(2.0))
            .collect()
    }

    /// Same modulation with a different average power (ER kept).
    pub fn with_avg_power(&self, avg_power: S) -> Result<Self> {
        Self::new(self.cardinality, self.symbol_rate, avg_power, self.extinction_ratio_db)
    }
}

/// Photodetector: responsivity R (A/W), avalanche gain G and excess noise factor F (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotodiodeSpec<S> {
    pub responsivity: S,
    pub gain: S,
    pub excess_noise: S,
}

impl<S: Scalar> PhotodiodeSpec<S> {
    pub fn new(responsivity: S, gain: S, excess_noise: S) -> Result<Self> {
        if !(responsivity > S::zero()) {
            return Err(domain(format!("responsivity must be positive, got {responsivity}")));
        }
        if !(gain >= S::one()) || !(excess_noise >= S::one()) {
            return Err(domain(format!(
                "APD gain and excess noise factor must be >= 1, got G={gain}, F={excess_noise}"
            )));
        }
        Ok(Self { responsivity, gain, excess_noise })
    }

    pub fn pin(responsivity: S) -> Result<Self> {
        Self::new(responsivity, S::one(), S::one())
    }

    /// APD with gain and excess noise given in dB.
    pub fn apd(responsivity: S, gain_db: S, excess_noise_db: S) -> Result<Self> {
        Self::new(responsivity, db_to_lin(gain_db), db_to_lin(excess_noise_db))
    }

    /// Optical-power to photocurrent factor G·R (A/W).
    pub fn conversion(&self) -> S {
        self.gain * self.responsivity
    }
}

/// Receiver thermal noise and transmitter RIN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec<S> {
    /// One-sided thermal current PSD at the TIA input (A²/Hz).
    pub thermal_n0: S,
    /// RIN coefficient in dB/Hz; `-inf` disables RIN.
    pub rin_db: S,
}

impl<S: Scalar> NoiseSpec<S> {
    pub fn new(thermal_n0: S, rin_db: S) -> Result<Self> {
        if thermal_n0.is_nan() || thermal_n0 < S::zero() {
            return Err(domain(format!("thermal N0 must be >= 0, got {thermal_n0}")));
        }
        if rin_db.is_nan() || rin_db == S::infinity() {
            return Err(domain(format!("RIN must be finite or -inf dB/Hz, got {rin_db}")));
        }
        Ok(Self { thermal_n0, rin_db })
    }

    /// Linear RIN coefficient (1/Hz).
    pub fn rin_coeff(&self) -> S {
        if self.rin_db == S::neg_infinity() {
            S::zero()
        } else {
            db_to_lin(self.rin_db)
        }
    }
}
