//! Scalar abstraction shared by every numeric kernel in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating point scalar: `f32` or `f64`.
///
/// Both `Float` and `Signed` (through `FftNum`) provide `abs`; call
/// `Float::abs(x)` explicitly where it is needed.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Display
    + Debug
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal fits the scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits the scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance for rank and degeneracy decisions at this precision.
    #[inline]
    fn rank_tolerance() -> Self {
        Self::epsilon().sqrt()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `exp(j 2π turns)` with the argument reduced to `[-0.5, 0.5)` turns first,
/// so large phase counts keep their fractional precision.
#[inline]
pub fn cis_turns<T: Real>(turns: T) -> Complex<T> {
    let reduced = turns - turns.round();
    Complex::from_polar(T::one(), T::TAU() * reduced)
}

/// `exp(j 2π num/den)` for integer phase fractions, reduced exactly.
#[inline]
pub fn cis_ratio<T: Real>(num: i64, den: u64) -> Complex<T> {
    let r = num.rem_euclid(den as i64) as usize;
    cis_turns(T::from_count(r) / T::from_count(den as usize))
}

pub(crate) fn round_half_up<T: Real>(x: T) -> T {
    // Values produced by exact bin centres can land a few ulps short of .5.
    (x + T::lit(0.5) + T::lit(1e-9)).floor()
}
