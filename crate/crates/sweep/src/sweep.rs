//! Cartesian parameter sweeps over a [`ConfigDoc`].

use std::time::Instant;

use imdd_core::analytic::FOLD_TAIL_TOLERANCE;
use imdd_core::simulate;
use log::warn;
use rayon::prelude::*;
use toml::Value;

use crate::config::{parse_value, ConfigDoc, LinkConfig};
use crate::error::{Result, SweepError};
use crate::sensitivity::sensitivity_search;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Analytic model only.
    Model,
    /// Time-domain simulation only.
    Sim,
    /// Both, with `delta = model − sim`.
    Compare,
    /// Receiver sensitivity and power budget at `sensitivity.target_ber`.
    Sensitivity,
}

impl Mode {
    pub fn result_columns(self) -> &'static [&'static str] {
        match self {
            Mode::Model => &["snr_ffe_db", "snr_dfe_db", "ber_ffe", "ber_dfe", "runtime_s"],
            Mode::Sim => &["seed", "snr_sim_ffe_db", "snr_sim_dfe_db", "ber_sim_ffe", "ber_sim_dfe", "runtime_s"],
            Mode::Compare => &[
                "seed",
                "snr_ffe_db",
                "snr_dfe_db",
                "snr_sim_ffe_db",
                "snr_sim_dfe_db",
                "delta_snr_ffe_db",
                "delta_snr_dfe_db",
                "ber_ffe",
                "ber_dfe",
                "ber_sim_ffe",
                "ber_sim_dfe",
                "runtime_s",
            ],
            Mode::Sensitivity => &["sensitivity_dbm", "opb_db", "opb_margin_db", "runtime_s"],
        }
    }
}

/// One swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<Value>,
}

impl Axis {
    /// Parses `key=start:stop:step` (inclusive) or `key=v1,v2,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |reason: &str| SweepError::Axis { axis: spec.to_string(), reason: reason.to_string() };
        let (key, rhs) = spec.split_once('=').ok_or_else(|| bad("expected key=values"))?;
        let key = key.trim().to_string();
        if !ConfigDoc::is_known_key(&key) {
            return Err(SweepError::UnknownKey(key));
        }
        let rhs = rhs.trim();
        let parts: Vec<&str> = rhs.split(':').collect();
        let values = match parts.as_slice() {
            [a, b, c] => {
                let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("range bounds must be numbers"));
                let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
                range(start, stop, step).ok_or_else(|| bad("step must be nonzero and point from start to stop"))?
                    .into_iter()
                    .map(Value::Float)
                    .collect()
            }
            [_] => rhs.split(',').filter(|s| !s.trim().is_empty()).map(parse_value).collect::<Vec<_>>(),
            _ => return Err(bad("range must be start:stop:step")),
        };
        if values.is_empty() {
            return Err(bad("no values"));
        }
        let values = values.into_iter().map(|v| coerce(&key, v)).collect();
        Ok(Self { key, values })
    }
}

fn range(start: f64, stop: f64, step: f64) -> Option<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step == 0.0 || (stop - start) * step < 0.0 {
        return None;
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Some(
        (0..n)
            .map(|i| {
                let v = start + i as f64 * step;
                format!("{v:.12e}").parse().unwrap_or(v)
            })
            .collect(),
    )
}

/// Integral floats become integers where the parameter is an integer.
fn coerce(key: &str, v: Value) -> Value {
    let defaults = ConfigDoc::from_config(&LinkConfig::default());
    match (defaults.get(key), &v) {
        (Some(Value::Integer(_)), Value::Float(x)) if x.fract() == 0.0 => Value::Integer(*x as i64),
        _ => v,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<&Value> for Field {
    fn from(v: &Value) -> Self {
        match v {
            Value::Float(x) => Field::Num(*x),
            Value::Integer(i) => Field::Int(*i),
            Value::Boolean(b) => Field::Int(*b as i64),
            Value::String(s) => Field::Text(s.clone()),
            other => Field::Text(other.to_string()),
        }
    }
}

/// Output row: swept values first, then the mode's result columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub index: usize,
    pub fields: Vec<(String, Field)>,
}

impl SweepRecord {
    pub fn get(&self, name: &str) -> Option<&Field> {
        self.fields.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn num(&self, name: &str) -> Option<f64> {
        match self.get(name)? {
            Field::Num(x) => Some(*x),
            Field::Int(i) => Some(*i as f64),
            Field::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: ConfigDoc,
    pub axes: Vec<Axis>,
    pub mode: Mode,
    /// Master seed; `sim.seed` when unset.
    pub seed: Option<u64>,
    /// Worker threads; rayon's default when unset.
    pub jobs: Option<usize>,
}

impl SweepSpec {
    pub fn new(base: ConfigDoc, mode: Mode) -> Self {
        Self { base, axes: Vec::new(), mode, seed: None, jobs: None }
    }

    pub fn with_axis(mut self, axis: Axis) -> Self {
        self.axes.push(axis);
        self
    }

    pub fn n_points(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn columns(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.key.clone()).chain(self.mode.result_columns().iter().map(|s| s.to_string())).collect()
    }

    /// Axis values of grid point `index`; the last axis varies fastest.
    pub fn point(&self, mut index: usize) -> Vec<(&str, &Value)> {
        let mut out = Vec::with_capacity(self.axes.len());
        let mut sizes: Vec<usize> = self.axes.iter().map(|a| a.values.len()).collect();
        sizes.reverse();
        for (axis, n) in self.axes.iter().rev().zip(sizes) {
            out.push((axis.key.as_str(), &axis.values[index % n]));
            index /= n;
        }
        out.reverse();
        out
    }

    pub fn point_config(&self, index: usize) -> Result<LinkConfig> {
        let mut doc = self.base.clone();
        for (k, v) in self.point(index) {
            doc.set(k, v.clone())?;
        }
        doc.typed()
    }
}

/// Evaluates every grid point; records come back in grid order whatever the
/// thread count, and point `i` is simulated with seed `seed ^ i`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    let base = spec.base.typed()?;
    for axis in &spec.axes {
        if !ConfigDoc::is_known_key(&axis.key) {
            return Err(SweepError::UnknownKey(axis.key.clone()));
        }
    }
    let points = spec.n_points();
    if points > base.sweep.max_points {
        return Err(SweepError::TooManyPoints { points, cap: base.sweep.max_points });
    }
    let master = spec.seed.unwrap_or(base.sim.seed);
    let work = || (0..points).into_par_iter().map(|i| evaluate_point(spec, i, master ^ i as u64)).collect();
    match spec.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| SweepError::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

fn evaluate_point(spec: &SweepSpec, index: usize, seed: u64) -> Result<SweepRecord> {
    let started = Instant::now();
    let cfg = spec.point_config(index)?;
    let mut fields: Vec<(String, Field)> = spec.point(index).into_iter().map(|(k, v)| (k.to_string(), Field::from(v))).collect();
    match spec.mode {
        Mode::Sensitivity => {
            let s = sensitivity_search(&cfg)?;
            let mut put = |name: &str, x: f64| fields.push((name.to_string(), Field::Num(x)));
            put("sensitivity_dbm", s.sensitivity_dbm);
            put("opb_db", s.opb_db);
            put("opb_margin_db", s.opb_db - cfg.sensitivity.required_opb_db);
        }
        mode => {
            let link = cfg.link()?;
            let model = match mode {
                Mode::Model | Mode::Compare => {
                    let r = link.evaluate_default()?;
                    if r.tail_fraction > FOLD_TAIL_TOLERANCE {
                        warn!("point {index}: SNR spectrum extends past the model grid (tail fraction {:.2e})", r.tail_fraction);
                    }
                    Some(r)
                }
                _ => None,
            };
            let sim = match mode {
                Mode::Sim | Mode::Compare => {
                    let sim_cfg = imdd_core::SimConfig { seed, ..cfg.sim_config()? };
                    let report = simulate(&link, &sim_cfg)?;
                    for w in report.ffe.warnings.iter().chain(report.dfe.iter().flat_map(|d| &d.warnings)) {
                        warn!("point {index}: {w}");
                    }
                    Some(report)
                }
                _ => None,
            };
            if sim.is_some() {
                fields.push(("seed".into(), Field::Int(seed as i64)));
            }
            let mut put = |name: &str, x: f64| fields.push((name.to_string(), Field::Num(x)));
            if let Some(m) = &model {
                put("snr_ffe_db", m.snr_ffe_db);
                put("snr_dfe_db", m.snr_dfe_db);
            }
            if let Some(s) = &sim {
                put("snr_sim_ffe_db", s.ffe.snr_mse_db);
                put("snr_sim_dfe_db", s.dfe.as_ref().map_or(f64::NAN, |d| d.snr_mse_db));
            }
            if let (Some(m), Some(s)) = (&model, &sim) {
                put("delta_snr_ffe_db", m.snr_ffe_db - s.ffe.snr_mse_db);
                put("delta_snr_dfe_db", s.dfe.as_ref().map_or(f64::NAN, |d| m.snr_dfe_db - d.snr_mse_db));
            }
            if let Some(m) = &model {
                put("ber_ffe", m.ber_ffe);
                put("ber_dfe", m.ber_dfe);
            }
            if let Some(s) = &sim {
                put("ber_sim_ffe", s.ffe.ber_counted);
                put("ber_sim_dfe", s.dfe.as_ref().map_or(f64::NAN, |d| d.ber_counted));
            }
        }
    }
    fields.push(("runtime_s".into(), Field::Num(started.elapsed().as_secs_f64())));
    Ok(SweepRecord { index, fields })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc() -> ConfigDoc {
        ConfigDoc::from_config(&LinkConfig::default())
    }

    #[test]
    fn axis_forms() {
        let a = Axis::parse("channel.b3db_over_rs=0.3:1.0:0.1").unwrap();
        assert_eq!(a.values.len(), 8);
        assert_eq!(a.values[7], Value::Float(1.0));
        assert_eq!(a.values[2], Value::Float(0.5));
        let b = Axis::parse("channel.order=1,3").unwrap();
        assert_eq!(b.values, vec![Value::Integer(1), Value::Integer(3)]);
        let c = Axis::parse("modulation.m=2:8:2").unwrap();
        assert_eq!(c.values, vec![Value::Integer(2), Value::Integer(4), Value::Integer(6), Value::Integer(8)]);
        let d = Axis::parse("noise.rin_db_hz=-120:-150:-10").unwrap();
        assert_eq!(d.values.len(), 4);
        let e = Axis::parse("sim.dfe_feedback=decisions,known").unwrap();
        assert_eq!(e.values[1], Value::String("known".into()));
        assert!(matches!(Axis::parse("channel.nope=1"), Err(SweepError::UnknownKey(_))));
        assert!(Axis::parse("channel.order").is_err());
        assert!(Axis::parse("channel.order=1:3:0").is_err());
        assert!(Axis::parse("channel.order=1:3:-1").is_err());
        assert!(Axis::parse("channel.order=1:3").is_err());
    }

    #[test]
    fn grid_order_last_axis_fastest() {
        let spec = SweepSpec::new(doc(), Mode::Model)
            .with_axis(Axis::parse("channel.order=1,3").unwrap())
            .with_axis(Axis::parse("channel.b3db_over_rs=0.4,0.6,0.8").unwrap());
        assert_eq!(spec.n_points(), 6);
        let p = spec.point(4);
        assert_eq!(p[0].1, &Value::Integer(3));
        assert_eq!(p[1].1, &Value::Float(0.6));
        let recs = run_sweep(&spec).unwrap();
        assert_eq!(recs.len(), 6);
        assert!(recs.iter().enumerate().all(|(i, r)| r.index == i));
        let names: Vec<&str> = recs[0].fields.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(names, spec.columns());
        assert!(recs[1].num("snr_ffe_db").unwrap() > recs[0].num("snr_ffe_db").unwrap());
        assert!(recs.iter().all(|r| r.get("delta_snr_ffe_db").is_none()));
    }

    #[test]
    fn single_point_equals_direct_model() {
        let recs = run_sweep(&SweepSpec::new(doc(), Mode::Model)).unwrap();
        assert_eq!(recs.len(), 1);
        let direct = LinkConfig::default().link().unwrap().evaluate_default().unwrap();
        assert_eq!(recs[0].num("snr_ffe_db").unwrap(), direct.snr_ffe_db);
        assert_eq!(recs[0].num("ber_dfe").unwrap(), direct.ber_dfe);
    }

    #[test]
    fn cap_and_domain_errors() {
        let mut base = doc();
        base.set("sweep.max_points", Value::Integer(3)).unwrap();
        let spec = SweepSpec::new(base, Mode::Model).with_axis(Axis::parse("channel.b3db_over_rs=0.1:1.0:0.1").unwrap());
        assert!(matches!(run_sweep(&spec), Err(SweepError::TooManyPoints { points: 10, cap: 3 })));
        let spec = SweepSpec::new(doc(), Mode::Model).with_axis(Axis::parse("modulation.er_db=-3").unwrap());
        assert!(matches!(run_sweep(&spec), Err(SweepError::Core(_))));
    }

    #[test]
    fn compare_mode_reports_delta_and_seeds() {
        let mut base = doc();
        base.merge_str("[sim]\nn_symbols = 4000\nffe_taps = 16\ndfe_feedback_taps = 2\n", "test").unwrap();
        let spec = SweepSpec {
            seed: Some(40),
            ..SweepSpec::new(base, Mode::Compare).with_axis(Axis::parse("channel.b3db_over_rs=0.5,0.7").unwrap())
        };
        let serial = run_sweep(&SweepSpec { jobs: Some(1), ..spec.clone() }).unwrap();
        let parallel = run_sweep(&SweepSpec { jobs: Some(4), ..spec.clone() }).unwrap();
        let strip = |r: &[SweepRecord]| -> Vec<Vec<(String, Field)>> {
            r.iter().map(|x| x.fields.iter().filter(|(k, _)| k != "runtime_s").cloned().collect()).collect()
        };
        assert_eq!(strip(&serial), strip(&parallel));
        assert_eq!(serial[0].num("seed"), Some(40.0));
        assert_eq!(serial[1].num("seed"), Some(41.0));
        let d = serial[0].num("delta_snr_ffe_db").unwrap();
        let expect = serial[0].num("snr_ffe_db").unwrap() - serial[0].num("snr_sim_ffe_db").unwrap();
        assert_eq!(d, expect);
    }

    proptest! {
        #[test]
        fn range_count_and_endpoints(start in -50.0f64..50.0, n in 1usize..40, step in 0.01f64..5.0) {
            let stop = start + step * (n - 1) as f64;
            let v = range(start, stop, step).unwrap();
            prop_assert_eq!(v.len(), n);
            prop_assert!((v[0] - start).abs() < 1e-9);
            prop_assert!((v[n - 1] - stop).abs() < 1e-9 * (1.0 + stop.abs()));
        }
    }
}
