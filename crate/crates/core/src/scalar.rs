//! Floating-point abstraction shared by the model and the simulator.
//!
//! Everything numeric in this crate is generic over [`Scalar`], which is
//! implemented for `f32` and `f64`. Operations that need a concrete backend
//! (FFT, `erfc`) are exposed as trait methods so generic code never has to
//! name `rustfft` or `libm` types.

use std::cell::RefCell;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftPlanner;

/// Electron charge (C).
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Real scalar used throughout the crate: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding when `Self` is narrower.
    fn of(v: f64) -> Self;

    /// Complementary error function.
    fn erfc(self) -> Self;

    /// In-place forward DFT, unnormalised.
    fn fft(buf: &mut [Complex<Self>]);

    /// In-place inverse DFT, normalised by `1/len`.
    fn ifft(buf: &mut [Complex<Self>]);

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_scalar {
    ($t:ty, $erfc:path) => {
        impl Scalar for $t {
            #[inline]
            fn of(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn erfc(self) -> Self {
                $erfc(self)
            }

            fn fft(buf: &mut [Complex<Self>]) {
                thread_local! {
                    static PLANNER: RefCell<FftPlanner<$t>> = RefCell::new(FftPlanner::new());
                }
                let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
                plan.process(buf);
            }

            fn ifft(buf: &mut [Complex<Self>]) {
                thread_local! {
                    static PLANNER: RefCell<FftPlanner<$t>> = RefCell::new(FftPlanner::new());
                }
                let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
                plan.process(buf);
                let norm = 1.0 / buf.len() as $t;
                for v in buf.iter_mut() {
                    *v *= norm;
                }
            }
        }
    };
}

impl_scalar!(f64, libm::erfc);
impl_scalar!(f32, libm::erfcf);

/// Frequency of DFT bin `k` for a length-`n` transform sampled at `fs`,
/// mapped to `[-fs/2, fs/2)`.
pub fn dft_bin_frequency<S: Scalar>(k: usize, n: usize, fs: S) -> S {
    let signed = if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    };
    S::of(signed) * fs / S::of(n as f64)
}
