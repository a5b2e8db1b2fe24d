//! Scalar abstraction for the engine's internal sample type.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Internal engine sample: `f64` by default, `f32` for low-precision builds.
///
/// Host exchange always happens in `f32`; conversion goes through
/// [`Sample::from_host`] and [`Sample::to_host`].
pub trait Sample:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    fn from_host(x: f32) -> Self;
    fn to_host(self) -> f32;

    /// Lossy for `f32`, exact for `f64`.
    fn from_real(x: f64) -> Self;
    fn to_real(self) -> f64;
}

impl Sample for f64 {
    #[inline]
    fn from_host(x: f32) -> Self {
        x as f64
    }
    #[inline]
    fn to_host(self) -> f32 {
        self as f32
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_real(self) -> f64 {
        self
    }
}

impl Sample for f32 {
    #[inline]
    fn from_host(x: f32) -> Self {
        x
    }
    #[inline]
    fn to_host(self) -> f32 {
        self
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn to_real(self) -> f64 {
        self as f64
    }
}
