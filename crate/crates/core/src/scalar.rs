//! Scalar abstractions.
//!
//! [`Scalar`] is the field the series engine and the coefficient families are
//! written against: `f32`, `f64` and [`BigRational`] all implement it, which is
//! what lets the same solver run in floating point or in exact arithmetic.
//! [`Real`] adds the transcendental operations needed for pricing.

use std::fmt::{Debug, Display, LowerExp};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};

/// A field element usable by the coefficient and series code.
pub trait Scalar:
    Clone + Debug + PartialEq + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    /// Embeds a machine integer.
    fn int(v: i64) -> Self;

    /// Embeds an exact rational, rounding if the type is inexact.
    fn ratio(r: &BigRational) -> Self;

    /// Exact rational value, `None` when not finite.
    fn to_ratio(&self) -> Option<BigRational>;

    /// Magnitude as `f64`, for diagnostics only.
    fn approx(&self) -> f64;

    fn is_exact() -> bool {
        false
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn frac(num: i64, den: i64) -> Self {
        Self::ratio(&BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
}

impl Scalar for f64 {
    fn int(v: i64) -> Self {
        v as f64
    }
    fn ratio(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn to_ratio(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }
    fn approx(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn int(v: i64) -> Self {
        v as f32
    }
    fn ratio(r: &BigRational) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }
    fn to_ratio(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }
    fn approx(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigRational {
    fn int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn ratio(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_ratio(&self) -> Option<BigRational> {
        Some(self.clone())
    }
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn is_exact() -> bool {
        true
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// Floating-point scalar with the error function.
pub trait Real:
    Scalar + Float + FloatConst + FromPrimitive + Copy + Display + LowerExp + Default
{
    fn erf(self) -> Self;
    fn erfc(self) -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite literal")
    }
}

impl Real for f64 {
    fn erf(self) -> Self {
        libm::erf(self)
    }
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Real for f32 {
    fn erf(self) -> Self {
        libm::erff(self)
    }
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}
