use super::number::Number;
use super::rational::rational_to_f64;
use super::surd::Surd;
use num_rational::BigRational;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("value {0} is a double; exact arithmetic is unavailable for this input")]
pub struct InexactValue(pub f64);

/// Field of matrix entries and function values.
///
/// [`Surd`] gives exact results (square roots included); `f64` is the fast path.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(q: &BigRational) -> Self;
    /// `√q` for `q ≥ 0`.
    fn sqrt_rational(q: &BigRational) -> Self;
    fn from_f64(x: f64) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn inv(&self) -> Option<Self>;
    fn to_f64(&self) -> f64;
    /// Rational when possible, a double otherwise.
    fn to_number(&self) -> Number;

    fn from_number(x: &Number) -> Result<Self, InexactValue> {
        match x {
            Number::Exact(q) => Ok(Self::from_rational(q)),
            Number::Approx(v) => Self::from_f64(*v).ok_or(InexactValue(*v)),
        }
    }

    fn sqrt_number(x: &Number) -> Result<Self, InexactValue> {
        match x {
            Number::Exact(q) => Ok(Self::sqrt_rational(q)),
            Number::Approx(v) => Self::from_f64(v.max(0.0).sqrt()).ok_or(InexactValue(*v)),
        }
    }

    /// `|a − b|`; exactly 0 iff the values agree in exact arithmetic.
    fn distance(&self, other: &Self) -> f64 {
        let d = (self.clone() - other.clone()).to_f64().abs();
        if Self::EXACT {
            if self == other {
                0.0
            } else {
                d.max(f64::MIN_POSITIVE)
            }
        } else {
            d
        }
    }

    fn is_negative(&self) -> bool {
        self.to_f64() < 0.0
    }

    fn scaled(&self, q: &BigRational) -> Self {
        self.clone() * Self::from_rational(q)
    }
}

impl Scalar for Surd {
    const EXACT: bool = true;
    const NAME: &'static str = "exact";

    fn zero() -> Self {
        Surd::zero()
    }
    fn one() -> Self {
        Surd::one()
    }
    fn from_rational(q: &BigRational) -> Self {
        Surd::from_rational(q.clone())
    }
    fn sqrt_rational(q: &BigRational) -> Self {
        Surd::sqrt(q)
    }
    fn from_f64(_: f64) -> Option<Self> {
        None
    }
    fn is_zero(&self) -> bool {
        Surd::is_zero(self)
    }
    fn inv(&self) -> Option<Self> {
        Surd::inv(self)
    }
    fn to_f64(&self) -> f64 {
        Surd::to_f64(self)
    }
    fn to_number(&self) -> Number {
        match self.as_rational() {
            Some(q) => Number::Exact(q),
            None => Number::Approx(Surd::to_f64(self)),
        }
    }
    fn scaled(&self, q: &BigRational) -> Self {
        self.scale(q)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const NAME: &'static str = "double";

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(q: &BigRational) -> Self {
        rational_to_f64(q)
    }
    fn sqrt_rational(q: &BigRational) -> Self {
        rational_to_f64(q).sqrt()
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(x)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn inv(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_number(&self) -> Number {
        Number::Approx(*self)
    }
}
