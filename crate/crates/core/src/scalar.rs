//! Floating-point abstraction shared by every numerical kernel.

use std::fmt::{Debug, Display, LowerExp};
use std::ops::{AddAssign, DivAssign, MulAssign, RemAssign, SubAssign};
use std::iter::Sum;

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Real scalar usable by the solver: `f32` or `f64`.
///
/// Anything FFT-able by `rustfft` that also behaves as an IEEE float
/// qualifies. Literals are built through [`Real::lit`] so kernels can be
/// written once for both precisions.
pub trait Real:
    Float
    + FloatConst
    + FftNum
    + Default
    + Display
    + LowerExp
    + Debug
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + RemAssign
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding to the target precision.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("f64 literal representable")
    }

    /// Converts an integer count or index.
    #[inline]
    fn count(n: usize) -> Self {
        <Self as num_traits::NumCast>::from(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
