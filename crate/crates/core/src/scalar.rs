//! Scalar abstraction shared by the numerical modules.
//!
//! Closed-form physics and the Fock-space oracle are written against
//! [`Real`], so they run in `f32` or `f64`. Exact enumeration in the GHZ
//! engine works over any [`Field`], which includes arbitrary-precision
//! rationals.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar used by the continuous models.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only for types that cannot hold it,
    /// which never happens for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Exact or approximate field arithmetic, enough to normalise probability
/// ratios without square roots.
pub trait Field:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + num_traits::Zero
    + num_traits::One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn to_f64_approx(&self) -> f64;
}

impl Field for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64_approx(&self) -> f64 {
        *self
    }
}

impl Field for f32 {
    fn from_i64(v: i64) -> Self {
        v as f32
    }
    fn to_f64_approx(&self) -> f64 {
        *self as f64
    }
}

impl Field for num_rational::BigRational {
    fn from_i64(v: i64) -> Self {
        num_rational::BigRational::from_integer(v.into())
    }
    fn to_f64_approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}
