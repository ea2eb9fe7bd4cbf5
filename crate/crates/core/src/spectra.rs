//! Frequency grids and linear transfer functions.
//!
//! Responses are kept as closed forms ([`Response`]) and only sampled when a
//! grid is known, so the model grid and the simulator's DFT bins evaluate the
//! same expressions without interpolation.

use std::path::Path;

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::scalar::{Scalar, SPEED_OF_LIGHT};

/// Uniform grid on `[-f_max, f_max]` with an odd number of points (so `f = 0` is sampled).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid<S> {
    n_points: usize,
    f_max: S,
}

impl<S: Scalar> FrequencyGrid<S> {
    pub const DEFAULT_POINTS: usize = (1 << 14) + 1;
    pub const DEFAULT_SPAN_OVER_RS: f64 = 4.0;

    pub fn new(n_points: usize, f_max: S) -> Result<Self> {
        if n_points < 3 || n_points.is_multiple_of(2) {
            return Err(domain(format!("grid needs an odd number of points >= 3, got {n_points}")));
        }
        if !(f_max > S::zero()) || !f_max.is_finite() {
            return Err(domain(format!("grid half-span must be positive, got {f_max}")));
        }
        Ok(Self { n_points, f_max })
    }

    /// Default grid for a symbol rate: ±4·Rs, 2¹⁴+1 points.
    pub fn for_symbol_rate(symbol_rate: S) -> Result<Self> {
        Self::new(Self::DEFAULT_POINTS, S::of(Self::DEFAULT_SPAN_OVER_RS) * symbol_rate)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn f_max(&self) -> S {
        self.f_max
    }

    pub fn df(&self) -> S {
        S::of(2.0) * self.f_max / S::of((self.n_points - 1) as f64)
    }

    pub fn center_index(&self) -> usize {
        self.n_points / 2
    }

    pub fn freq(&self, i: usize) -> S {
        S::of(i as f64 - self.center_index() as f64) * self.df()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = S> + '_ {
        (0..self.n_points).map(move |i| self.freq(i))
    }

    /// Same span with twice the resolution.
    /// Twice the span at the same spacing.
    pub fn widened(&self) -> Self {
        Self { n_points: 2 * self.n_points - 1, f_max: self.f_max + self.f_max }
    }

    pub fn refined(&self) -> Self {
        Self { n_points: 2 * self.n_points - 1, f_max: self.f_max }
    }
}

/// Standard single-mode fibre with chromatic dispersion only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberSpec<S> {
    /// Dispersion coefficient D (s/m²).
    pub dispersion: S,
    /// Length L (m).
    pub length: S,
    /// Carrier wavelength λc (m).
    pub wavelength: S,
}

impl<S: Scalar> FiberSpec<S> {
    pub fn new(dispersion: S, length: S, wavelength: S) -> Result<Self> {
        if length.is_nan() || length < S::zero() {
            return Err(domain(format!("fibre length must be >= 0, got {length}")));
        }
        if !(wavelength > S::zero()) {
            return Err(domain(format!("carrier wavelength must be positive, got {wavelength}")));
        }
        if !dispersion.is_finite() {
            return Err(domain("dispersion must be finite"));
        }
        Ok(Self { dispersion, length, wavelength })
    }

    /// D in ps/(nm·km), L in km, λ in nm.
    pub fn from_ps_nm_km(d_ps_nm_km: S, length_km: S, wavelength_nm: S) -> Result<Self> {
        Self::new(d_ps_nm_km * S::of(1e-6), length_km * S::of(1e3), wavelength_nm * S::of(1e-9))
    }

    pub fn back_to_back(wavelength: S) -> Self {
        Self { dispersion: S::zero(), length: S::zero(), wavelength }
    }

    /// D·L in s/m.
    pub fn accumulated_dispersion(&self) -> S {
        self.dispersion * self.length
    }

    pub fn accumulated_ps_per_nm(&self) -> S {
        self.accumulated_dispersion() * S::of(1e3)
    }

    pub fn carrier_frequency(&self) -> S {
        S::of(SPEED_OF_LIGHT) / self.wavelength
    }

    /// Quadratic phase π·c·D·L·(f/fc)² at baseband offset `f`.
    pub fn dispersion_phase(&self, f: S) -> S {
        let fc = self.carrier_frequency();
        let r = f / fc;
        S::PI() * S::of(SPEED_OF_LIGHT) * self.accumulated_dispersion() * r * r
    }
}

/// Measured response interpolated linearly in real and imaginary parts.
///
/// One-sided tables (all frequencies ≥ 0) are extended to negative
/// frequencies by Hermitian symmetry. Outside the tabulated range the
/// response is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<S> {
    freqs: Vec<S>,
    values: Vec<Complex<S>>,
    hermitian: bool,
}

impl<S: Scalar> Table<S> {
    pub fn new(points: Vec<(S, Complex<S>)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Table("need at least two points".into()));
        }
        let mut points = points;
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Table("frequencies must be distinct".into()));
        }
        let hermitian = points[0].0 >= S::zero();
        let (freqs, values) = points.into_iter().unzip();
        Ok(Self { freqs, values, hermitian })
    }

    /// Parses `f value` (real or `a+bj`) or `f re im` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',' || c == ';')
                .filter(|t| !t.is_empty())
                .collect();
            let bad = |what: &str| Error::Table(format!("line {}: {what}: {raw:?}", lineno + 1));
            let num = |t: &str| t.parse::<f64>().map_err(|_| bad("not a number"));
            let (f, v) = match toks.as_slice() {
                [f, v] => (num(f)?, parse_complex(v).ok_or_else(|| bad("bad complex value"))?),
                [f, re, im] => (num(f)?, (num(re)?, num(im)?)),
                _ => return Err(bad("expected 2 or 3 columns")),
            };
            points.push((S::of(f), Complex::new(S::of(v.0), S::of(v.1))));
        }
        Self::new(points)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn eval(&self, f: S) -> Complex<S> {
        if self.hermitian && f < S::zero() {
            return self.eval(-f).conj();
        }
        let n = self.freqs.len();
        if f < self.freqs[0] || f > self.freqs[n - 1] {
            return Complex::new(S::zero(), S::zero());
        }
        let hi = self.freqs.partition_point(|&x| x < f).clamp(1, n - 1);
        let (f0, f1) = (self.freqs[hi - 1], self.freqs[hi]);
        let t = (f - f0) / (f1 - f0);
        self.values[hi - 1] * (S::one() - t) + self.values[hi] * t
    }
}

fn parse_complex(tok: &str) -> Option<(f64, f64)> {
    let t = tok.trim_matches(|c| c == '(' || c == ')');
    if let Ok(v) = t.parse::<f64>() {
        return Some((v, 0.0));
    }
    let body = t.strip_suffix('j').or_else(|| t.strip_suffix('i'))?;
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))?;
    let re = body[..split].parse::<f64>().ok()?;
    let im_str = &body[split..];
    let im = match im_str {
        "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().ok()?,
    };
    Some((re, im))
}

/// Closed-form linear response H(f).
#[derive(Debug, Clone, PartialEq)]
pub enum Response<S> {
    /// Frequency-independent real gain (e.g. a flat power loss).
    Flat(S),
    /// Zero-phase supergaussian low-pass, |H|² = 2^(−(f/B)^(2n)).
    Supergaussian { b3db: S, order: u32 },
    /// Rectangular NRZ pulse of duration `period`, normalised to H(0) = 1.
    Sinc { period: S },
    /// Chirpless small-signal intensity response of a dispersive fibre.
    CdSmallSignal(FiberSpec<S>),
    /// All-pass field response of a dispersive fibre.
    SmfField(FiberSpec<S>),
    Tabulated(Table<S>),
    Cascade(Vec<Response<S>>),
}

impl<S: Scalar> Response<S> {
    pub fn supergaussian(b3db: S, order: u32) -> Result<Self> {
        if !(b3db > S::zero()) {
            return Err(domain(format!("3 dB bandwidth must be positive, got {b3db}")));
        }
        if order == 0 {
            return Err(domain("supergaussian order must be >= 1"));
        }
        Ok(Response::Supergaussian { b3db, order })
    }

    pub fn eval(&self, f: S) -> Complex<S> {
        let real = |v: S| Complex::new(v, S::zero());
        match self {
            Response::Flat(g) => real(*g),
            Response::Supergaussian { b3db, order } => {
                let x = (f.abs() / *b3db).powi(2 * *order as i32);
                // |H|² = 2^-x  ⇒  H = exp(-x·ln2/2)
                real((-x * S::LN_2() / S::of(2.0)).exp())
            }
            Response::Sinc { period } => {
                let x = S::PI() * f * *period;
                if x.abs() < S::of(1e-8) {
                    real(S::one() - x * x / S::of(6.0))
                } else {
                    real(x.sin() / x)
                }
            }
            Response::CdSmallSignal(fiber) => real(fiber.dispersion_phase(f).cos()),
            Response::SmfField(fiber) => {
                let ph = fiber.dispersion_phase(f);
                Complex::new(ph.cos(), ph.sin())
            }
            Response::Tabulated(t) => t.eval(f),
            Response::Cascade(parts) => parts
                .iter()
                .fold(real(S::one()), |acc, p| acc * p.eval(f)),
        }
    }

    pub fn then(self, other: Response<S>) -> Response<S> {
        match self {
            Response::Cascade(mut parts) => {
                parts.push(other);
                Response::Cascade(parts)
            }
            first => Response::Cascade(vec![first, other]),
        }
    }
}

/// Complex response sampled on a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction<S> {
    grid: FrequencyGrid<S>,
    values: Vec<Complex<S>>,
}

impl<S: Scalar> TransferFunction<S> {
    pub fn sample(grid: &FrequencyGrid<S>, response: &Response<S>) -> Self {
        let values = grid.frequencies().map(|f| response.eval(f)).collect();
        Self { grid: *grid, values }
    }

    pub fn identity(grid: &FrequencyGrid<S>) -> Self {
        Self::sample(grid, &Response::Flat(S::one()))
    }

    pub fn from_values(grid: &FrequencyGrid<S>, values: Vec<Complex<S>>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid: *grid, values })
    }

    pub fn grid(&self) -> &FrequencyGrid<S> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<S>] {
        &self.values
    }

    pub fn magnitude_sq(&self) -> Vec<S> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn at_dc(&self) -> Complex<S> {
        self.values[self.grid.center_index()]
    }

    /// Pointwise product; grids must match.
    pub fn cascade(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Self { grid: self.grid, values })
    }

    /// H(−f) = conj(H(f)) on every grid point, within `tol`.
    pub fn is_hermitian(&self, tol: S) -> bool {
        let n = self.values.len();
        (0..n).all(|i| (self.values[i] - self.values[n - 1 - i].conj()).norm() <= tol)
    }
}

pub fn supergaussian<S: Scalar>(grid: &FrequencyGrid<S>, b3db: S, order: u32) -> Result<TransferFunction<S>> {
    Ok(TransferFunction::sample(grid, &Response::supergaussian(b3db, order)?))
}

/// H_T(f) = sinc(fT) for rectangular NRZ of period `symbol_period` (> 0).
pub fn pulse_shaping<S: Scalar>(grid: &FrequencyGrid<S>, symbol_period: S) -> TransferFunction<S> {
    TransferFunction::sample(grid, &Response::Sinc { period: symbol_period })
}

pub fn cd_small_signal<S: Scalar>(grid: &FrequencyGrid<S>, fiber: &FiberSpec<S>) -> TransferFunction<S> {
    TransferFunction::sample(grid, &Response::CdSmallSignal(*fiber))
}

/// Field transfer of the fibre; grid frequencies are offsets from the carrier.
pub fn smf_field_transfer<S: Scalar>(grid: &FrequencyGrid<S>, fiber: &FiberSpec<S>) -> TransferFunction<S> {
    TransferFunction::sample(grid, &Response::SmfField(*fiber))
}

/// Pointwise product of any number of transfer functions on one grid.
pub fn cascade<S: Scalar>(parts: &[&TransferFunction<S>]) -> Result<TransferFunction<S>> {
    let (first, rest) = parts.split_first().ok_or_else(|| domain("cascade of nothing"))?;
    rest.iter().try_fold((*first).clone(), |acc, tf| acc.cascade(tf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> FrequencyGrid<f64> {
        FrequencyGrid::new(2001, 100e9).unwrap()
    }

    #[test]
    fn grid_is_symmetric_with_exact_zero() {
        let g = grid();
        assert_eq!(g.freq(g.center_index()), 0.0);
        assert_eq!(g.freq(0), -100e9);
        assert!((g.freq(2000) - 100e9).abs() < 1e-3);
        assert!((g.df() - 1e8).abs() < 1e-6);
        assert!(FrequencyGrid::new(2000, 1e9_f64).is_err());
        assert!(FrequencyGrid::new(11, 0.0_f64).is_err());
        assert_eq!(g.refined().n_points(), 4001);
        assert_eq!(g.refined().freq(2000), 0.0);
    }

    #[test]
    fn supergaussian_three_db_point() {
        for order in 1..6 {
            let h = Response::<f64>::supergaussian(10e9, order).unwrap();
            assert!((h.eval(10e9).norm_sqr() - 0.5).abs() < 1e-12);
            assert!((h.eval(-10e9).norm_sqr() - 0.5).abs() < 1e-12);
            assert_eq!(h.eval(0.0).norm(), 1.0);
        }
        let h1 = Response::<f64>::supergaussian(10e9, 1).unwrap();
        assert!((h1.eval(20e9).norm_sqr() - 0.0625).abs() < 1e-12);
        assert!(Response::supergaussian(0.0, 1).is_err());
        assert!(supergaussian(&grid(), -1.0, 1).is_err());
        assert!(Response::supergaussian(1.0, 0).is_err());
    }

    #[test]
    fn supergaussian_brick_wall_limit() {
        let h = Response::<f64>::supergaussian(10e9, 200).unwrap();
        assert!((h.eval(9e9).norm() - 1.0).abs() < 1e-6);
        assert!(h.eval(11e9).norm() < 1e-6);
    }

    #[test]
    fn sinc_values() {
        let t: f64 = 40e-12;
        let h = Response::Sinc { period: t };
        assert_eq!(h.eval(0.0).re, 1.0);
        assert!(h.eval(1.0 / t).re.abs() < 1e-12);
        assert!((h.eval(0.5 / t).re - 2.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn cd_null_and_field_phase() {
        // 3.85 ps/nm/km × 25 km at 1310 nm.
        let fiber = FiberSpec::<f64>::from_ps_nm_km(3.85, 25.0, 1310.0).unwrap();
        assert!((fiber.accumulated_ps_per_nm() - 96.25).abs() < 1e-9);
        let f_null = (SPEED_OF_LIGHT / (2.0 * fiber.accumulated_dispersion() * 1310e-9 * 1310e-9)).sqrt();
        assert!((f_null - 30.1e9).abs() < 0.1e9, "{f_null}");
        let cd = Response::CdSmallSignal(fiber);
        assert!(cd.eval(f_null).re.abs() < 1e-9);
        assert_eq!(cd.eval(0.0).re, 1.0);
        let smf = Response::SmfField(fiber);
        let ph = smf.eval(f_null).arg();
        assert!((ph - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn back_to_back_is_identity() {
        let g = grid();
        let b2b = FiberSpec::back_to_back(1310e-9);
        let cd = cd_small_signal(&g, &b2b);
        let smf = smf_field_transfer(&g, &b2b);
        assert!(cd.values().iter().all(|v| *v == Complex::new(1.0, 0.0)));
        assert!(smf.values().iter().all(|v| (v - Complex::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn field_transfer_is_all_pass() {
        let g = grid();
        let fiber = FiberSpec::from_ps_nm_km(17.0, 10.0, 1550.0).unwrap();
        let smf = smf_field_transfer(&g, &fiber);
        assert!(smf.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn cascade_properties() {
        let g = grid();
        let sg = supergaussian(&g, 20e9, 1).unwrap();
        let cd = cd_small_signal(&g, &FiberSpec::from_ps_nm_km(3.85, 25.0, 1310.0).unwrap());
        let id = TransferFunction::identity(&g);
        assert_eq!(cascade(&[&sg, &id]).unwrap(), sg);
        let ab = cascade(&[&sg, &cd]).unwrap();
        let ba = cascade(&[&cd, &sg]).unwrap();
        assert_eq!(ab, ba);
        for (c, s) in ab.values().iter().zip(sg.values()) {
            assert!(c.norm() <= s.norm() + 1e-15);
        }
        let other = supergaussian(&FrequencyGrid::new(101, 1e9).unwrap(), 1e8, 1).unwrap();
        assert_eq!(sg.cascade(&other), Err(Error::GridMismatch));
    }

    #[test]
    fn produced_responses_are_hermitian() {
        let g = grid();
        let fiber = FiberSpec::from_ps_nm_km(3.85, 25.0, 1310.0).unwrap();
        for tf in [
            supergaussian(&g, 20e9, 3).unwrap(),
            pulse_shaping(&g, 1.0 / 25e9),
            cd_small_signal(&g, &fiber),
        ] {
            assert!(tf.is_hermitian(1e-12));
        }
    }

    #[test]
    fn table_parsing_and_interpolation() {
        let t = Table::<f64>::parse(
            "# f  H\n0 1\n1e9, 0.5+0.5j\n2e9 0.0 -1.0   # trailing comment\n",
        )
        .unwrap();
        assert_eq!(t.eval(0.0), Complex::new(1.0, 0.0));
        assert_eq!(t.eval(0.5e9), Complex::new(0.75, 0.25));
        assert_eq!(t.eval(1.5e9), Complex::new(0.25, -0.25));
        // one-sided table: Hermitian extension, zero beyond range
        assert_eq!(t.eval(-0.5e9), Complex::new(0.75, -0.25));
        assert_eq!(t.eval(3e9), Complex::new(0.0, 0.0));
        assert!(Table::<f64>::parse("0 1\n").is_err());
        assert!(Table::<f64>::parse("0 1 2 3\n1 2\n").is_err());
        assert!(Table::<f64>::parse("0 abc\n1 2\n").is_err());
        assert_eq!(parse_complex("1e-3-2e-3j"), Some((1e-3, -2e-3)));
        assert_eq!(parse_complex("(2+j)"), Some((2.0, 1.0)));
    }

    proptest! {
        #[test]
        fn cd_is_even(f in -200e9f64..200e9, dl in 0.0f64..400.0) {
            let fiber = FiberSpec::from_ps_nm_km(dl, 1.0, 1310.0).unwrap();
            let cd = Response::CdSmallSignal(fiber);
            prop_assert!((cd.eval(f) - cd.eval(-f)).norm() < 1e-12);
            prop_assert!(cd.eval(f).re.abs() <= 1.0);
        }
    }
}
