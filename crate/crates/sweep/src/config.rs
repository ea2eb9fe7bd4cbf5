//! Link configuration: a TOML document addressed by dotted keys.
//!
//! Layers apply in order: built-in defaults (or a preset), the config file,
//! `IMDD_SECTION__KEY` environment variables, then per-point sweep values.

use std::path::{Path, PathBuf};

use imdd_core::units::dbm_to_watts;
use imdd_core::{
    CdMode, Feedback, FiberSpec, Link64, ModulationSpec, NoiseSpec, PhotodiodeSpec, Response, SimConfig, Table,
    TapSpacing,
};
use serde::{Deserialize, Serialize};
use toml::{Table as TomlTable, Value};

use crate::error::{Result, SweepError};

pub const ENV_PREFIX: &str = "IMDD_";

/// Keys that are valid but absent from the defaults.
const OPTIONAL_KEYS: &[&str] = &["modulation.oma_dbm", "channel.table", "rx.b3db_over_rs", "sim.dump"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModulationConfig {
    pub m: usize,
    pub symbol_rate_gbaud: f64,
    pub p_tx_dbm: f64,
    pub er_db: f64,
    /// Outer OMA; overrides `er_db` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oma_dbm: Option<f64>,
}

impl Default for ModulationConfig {
    fn default() -> Self {
        Self { m: 4, symbol_rate_gbaud: 25.0, p_tx_dbm: 0.0, er_db: 6.0, oma_dbm: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub b3db_over_rs: f64,
    pub order: u32,
    pub loss_db: f64,
    /// Tabulated response file; replaces the supergaussian.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { b3db_over_rs: 0.5, order: 1, loss_db: 0.0, table: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub n0: f64,
    pub rin_db_hz: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { n0: 2e-19, rin_db_hz: -140.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhotodiodeConfig {
    pub responsivity: f64,
    pub gain_db: f64,
    pub excess_noise_db: f64,
}

impl Default for PhotodiodeConfig {
    fn default() -> Self {
        Self { responsivity: 1.0, gain_db: 0.0, excess_noise_db: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberConfig {
    /// Zero disables the fibre.
    pub length_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub wavelength_nm: f64,
}

impl Default for FiberConfig {
    fn default() -> Self {
        Self { length_km: 0.0, dispersion_ps_nm_km: 0.0, wavelength_nm: 1310.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RxConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b3db_over_rs: Option<f64>,
    pub order: u32,
}

impl Default for RxConfig {
    fn default() -> Self {
        Self { b3db_over_rs: None, order: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub samples_per_symbol: usize,
    pub n_symbols: usize,
    pub seed: u64,
    pub ffe_taps: usize,
    pub dfe_feedback_taps: usize,
    pub training_fraction: f64,
    /// `field`, `small_signal` or `off`.
    pub cd_mode: String,
    /// `half_symbol` or `symbol`.
    pub tap_spacing: String,
    /// `decisions` or `known`.
    pub dfe_feedback: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump: Option<PathBuf>,
}

impl Default for SimSection {
    fn default() -> Self {
        let d = SimConfig::default();
        Self {
            samples_per_symbol: d.samples_per_symbol,
            n_symbols: d.n_symbols,
            seed: d.seed,
            ffe_taps: d.ffe_taps,
            dfe_feedback_taps: d.dfe_feedback_taps,
            training_fraction: d.training_fraction,
            cd_mode: "field".into(),
            tap_spacing: "half_symbol".into(),
            dfe_feedback: "decisions".into(),
            dump: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensitivityConfig {
    pub target_ber: f64,
    pub p_rx_min_dbm: f64,
    pub p_rx_max_dbm: f64,
    /// `ffe` or `dfe`.
    pub equalizer: String,
    pub required_opb_db: f64,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self { target_ber: 1e-2, p_rx_min_dbm: -40.0, p_rx_max_dbm: 10.0, equalizer: "ffe".into(), required_opb_db: 29.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub max_points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { max_points: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    pub modulation: ModulationConfig,
    pub channel: ChannelConfig,
    pub noise: NoiseConfig,
    pub photodiode: PhotodiodeConfig,
    pub fiber: FiberConfig,
    pub rx: RxConfig,
    pub sim: SimSection,
    pub sensitivity: SensitivityConfig,
    pub sweep: SweepSection,
}

impl LinkConfig {
    /// Passive optical network profile: 50 GBaud 4-PAM, 11 dBm launch, 25 km
    /// O-band fibre, 50G-class APD.
    pub fn pon() -> Self {
        let mut c = Self::default();
        c.modulation.symbol_rate_gbaud = 50.0;
        c.modulation.p_tx_dbm = 11.0;
        c.modulation.er_db = 6.0;
        c.channel.b3db_over_rs = 0.7;
        c.fiber = FiberConfig { length_km: 25.0, dispersion_ps_nm_km: 3.85, wavelength_nm: 1310.0 };
        c.photodiode = PhotodiodeConfig { responsivity: 0.7, gain_db: 10.0, excess_noise_db: 4.3 };
        c.noise.n0 = 1e-22;
        c.sensitivity.target_ber = SD_FEC_BER;
        c
    }

    pub fn symbol_rate(&self) -> f64 {
        self.modulation.symbol_rate_gbaud * 1e9
    }

    pub fn modulation_spec(&self) -> Result<ModulationSpec<f64>> {
        let m = &self.modulation;
        let p = dbm_to_watts(m.p_tx_dbm);
        Ok(match m.oma_dbm {
            Some(oma) => ModulationSpec::from_oma(m.m, self.symbol_rate(), p, dbm_to_watts(oma))?,
            None => ModulationSpec::new(m.m, self.symbol_rate(), p, m.er_db)?,
        })
    }

    pub fn link(&self) -> Result<Link64> {
        let rs = self.symbol_rate();
        let bandwidth = match &self.channel.table {
            Some(path) => Response::Tabulated(Table::read(path)?),
            None => Response::supergaussian(self.channel.b3db_over_rs * rs, self.channel.order)?,
        };
        let pd = &self.photodiode;
        let mut link = Link64::new(
            self.modulation_spec()?,
            PhotodiodeSpec::apd(pd.responsivity, pd.gain_db, pd.excess_noise_db)?,
            NoiseSpec::new(self.noise.n0, self.noise.rin_db_hz)?,
            bandwidth,
        )
        .with_loss_db(self.channel.loss_db);
        if self.fiber.length_km != 0.0 {
            let f = &self.fiber;
            link = link.with_fiber(FiberSpec::from_ps_nm_km(f.dispersion_ps_nm_km, f.length_km, f.wavelength_nm)?);
        }
        if let Some(b) = self.rx.b3db_over_rs {
            link = link.with_rx_filter(Response::supergaussian(b * rs, self.rx.order)?);
        }
        if !(self.channel.loss_db.is_finite() && self.channel.loss_db >= 0.0) {
            return Err(SweepError::Config(format!("channel.loss_db must be finite and >= 0, got {}", self.channel.loss_db)));
        }
        Ok(link)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let s = &self.sim;
        let cd_mode = match s.cd_mode.as_str() {
            "field" => CdMode::Field,
            "small_signal" => CdMode::SmallSignal,
            "off" => CdMode::Off,
            other => return Err(SweepError::Config(format!("sim.cd_mode: unknown value {other:?}"))),
        };
        let tap_spacing = match s.tap_spacing.as_str() {
            "half_symbol" => TapSpacing::HalfSymbol,
            "symbol" => TapSpacing::Symbol,
            other => return Err(SweepError::Config(format!("sim.tap_spacing: unknown value {other:?}"))),
        };
        let feedback = match s.dfe_feedback.as_str() {
            "decisions" => Feedback::Decisions,
            "known" => Feedback::KnownSymbols,
            other => return Err(SweepError::Config(format!("sim.dfe_feedback: unknown value {other:?}"))),
        };
        let cfg = SimConfig {
            samples_per_symbol: s.samples_per_symbol,
            n_symbols: s.n_symbols,
            seed: s.seed,
            ffe_taps: s.ffe_taps,
            dfe_feedback_taps: s.dfe_feedback_taps,
            training_fraction: s.training_fraction,
            cd_mode,
            tap_spacing,
            feedback,
            dump_path: s.dump.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub const HD_FEC_BER: f64 = 1e-2;
pub const SD_FEC_BER: f64 = 1.9e-2;

/// A config held as a TOML tree so dotted keys can be set before it is typed.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDoc {
    root: TomlTable,
}

impl ConfigDoc {
    pub fn from_config(cfg: &LinkConfig) -> Self {
        match Value::try_from(cfg) {
            Ok(Value::Table(root)) => Self { root },
            _ => unreachable!("LinkConfig always serializes to a table"),
        }
    }

    pub fn is_known_key(key: &str) -> bool {
        if OPTIONAL_KEYS.contains(&key) {
            return true;
        }
        let defaults = Self::from_config(&LinkConfig::default());
        matches!(defaults.get(key), Some(v) if !v.is_table())
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        let mut parts = key.split('.');
        let mut cur = self.root.get(parts.next()?)?;
        for p in parts {
            cur = cur.as_table()?.get(p)?;
        }
        Some(cur)
    }

    /// Sets a leaf; the key must name a known parameter.
    pub fn set(&mut self, key: &str, value: Value) -> Result<()> {
        if !Self::is_known_key(key) {
            return Err(SweepError::UnknownKey(key.to_string()));
        }
        let (section, leaf) = key.split_once('.').ok_or_else(|| SweepError::UnknownKey(key.to_string()))?;
        let table = self
            .root
            .entry(section.to_string())
            .or_insert_with(|| Value::Table(TomlTable::new()))
            .as_table_mut()
            .ok_or_else(|| SweepError::UnknownKey(key.to_string()))?;
        table.insert(leaf.to_string(), value);
        Ok(())
    }

    /// Overlays every leaf of a TOML document.
    pub fn merge_str(&mut self, text: &str, origin: &str) -> Result<()> {
        let doc: TomlTable = text.parse().map_err(|e| SweepError::Config(format!("{origin}: {e}")))?;
        let mut leaves = Vec::new();
        flatten("", &Value::Table(doc), &mut leaves);
        for (k, v) in leaves {
            self.set(&k, v)?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| SweepError::Io { path: path.display().to_string(), message: e.to_string() })?;
        self.merge_str(&text, &path.display().to_string())
    }

    /// Applies `IMDD_SECTION__KEY=value` pairs; other variables are ignored.
    pub fn merge_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        let mut pairs: Vec<(String, String)> = vars
            .into_iter()
            .filter_map(|(k, v)| {
                let rest = k.strip_prefix(ENV_PREFIX)?;
                rest.contains("__").then(|| (rest.to_lowercase().replace("__", "."), v))
            })
            .collect();
        pairs.sort();
        for (key, raw) in pairs {
            let v = parse_value(&raw);
            self.set(&key, v).map_err(|e| SweepError::Config(format!("environment {ENV_PREFIX}{}: {e}", key.to_uppercase().replace('.', "__"))))?;
        }
        Ok(())
    }

    pub fn typed(&self) -> Result<LinkConfig> {
        Value::Table(self.root.clone()).try_into().map_err(|e: toml::de::Error| SweepError::Config(e.message().to_string()))
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        leaf => out.push((prefix.to_string(), leaf.clone())),
    }
}

/// Reads a scalar as a TOML literal, falling back to a bare string.
pub fn parse_value(raw: &str) -> Value {
    let raw = raw.trim();
    format!("v = {raw}")
        .parse::<TomlTable>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .filter(|v| !v.is_table() && !v.is_array())
        .unwrap_or_else(|| Value::String(raw.to_string()))
}
