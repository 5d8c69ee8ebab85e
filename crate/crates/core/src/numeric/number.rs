use super::rational::{format_rational, rational_to_f64};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A measure value: exact when every input was rational, a double otherwise.
#[derive(Clone, Debug)]
pub enum Number {
    Exact(BigRational),
    Approx(f64),
}

impl Number {
    pub fn zero() -> Self {
        Number::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Number::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Number::Exact(BigRational::from_integer(n.into()))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Number::Exact(q) => Some(q),
            Number::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(q) => rational_to_f64(q),
            Number::Approx(x) => *x,
        }
    }

    /// Exact zero test for rationals; doubles are zero only when literally 0.
    pub fn is_zero(&self) -> bool {
        match self {
            Number::Exact(q) => q.is_zero(),
            Number::Approx(x) => *x == 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Number::Exact(q) => q.is_positive(),
            Number::Approx(x) => *x > 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Number::Exact(q) => q.is_negative(),
            Number::Approx(x) => *x < 0.0,
        }
    }

    pub fn checked_div(&self, other: &Number) -> Option<Number> {
        if other.is_zero() {
            return None;
        }
        Some(match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(a / b),
            _ => Number::Approx(self.to_f64() / other.to_f64()),
        })
    }

    pub fn sqrt_f64(&self) -> f64 {
        self.to_f64().max(0.0).sqrt()
    }

    /// `|a - b|`, exactly 0 when two exact values agree.
    pub fn distance(&self, other: &Number) -> f64 {
        match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => {
                if a == b {
                    0.0
                } else {
                    rational_to_f64(&(a - b).abs()).max(f64::MIN_POSITIVE)
                }
            }
            _ => (self.to_f64() - other.to_f64()).abs(),
        }
    }

    pub fn is_close(&self, other: &Number, tol: f64) -> bool {
        self.distance(other) <= tol
    }
}

impl From<BigRational> for Number {
    fn from(q: BigRational) -> Self {
        Number::Exact(q)
    }
}

impl From<f64> for Number {
    fn from(x: f64) -> Self {
        Number::Approx(x)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(q) => f.write_str(&format_rational(q)),
            Number::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl serde::Serialize for Number {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Number::Exact(q) => s.serialize_str(&format_rational(q)),
            Number::Approx(x) => s.serialize_f64(*x),
        }
    }
}

macro_rules! number_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Number> for &Number {
            type Output = Number;
            fn $method(self, rhs: &Number) -> Number {
                match (self, rhs) {
                    (Number::Exact(a), Number::Exact(b)) => Number::Exact(a $op b),
                    _ => Number::Approx(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl $trait for Number {
            type Output = Number;
            fn $method(self, rhs: Number) -> Number {
                (&self).$method(&rhs)
            }
        }
    };
}

number_binop!(Add, add, +);
number_binop!(Sub, sub, -);
number_binop!(Mul, mul, *);

impl Div for Number {
    type Output = Number;
    fn div(self, rhs: Number) -> Number {
        self.checked_div(&rhs).expect("division by zero measure value")
    }
}

impl Neg for Number {
    type Output = Number;
    fn neg(self) -> Number {
        match self {
            Number::Exact(q) => Number::Exact(-q),
            Number::Approx(x) => Number::Approx(-x),
        }
    }
}

impl Sum for Number {
    fn sum<I: Iterator<Item = Number>>(iter: I) -> Number {
        iter.fold(Number::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Number> for Number {
    fn sum<I: Iterator<Item = &'a Number>>(iter: I) -> Number {
        iter.fold(Number::zero(), |acc, x| &acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational::ratio;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Number::Exact(ratio(1, 3));
        let b = Number::Exact(ratio(2, 3));
        let s = &a + &b;
        assert!(s.is_exact());
        assert_eq!(s.distance(&Number::one()), 0.0);
        assert_eq!((a.clone() * b.clone()).to_string(), "2/9");
        assert_eq!(a.checked_div(&b).unwrap().to_string(), "1/2");
    }

    #[test]
    fn mixing_with_doubles_degrades() {
        let a = Number::Exact(ratio(1, 2));
        let b = Number::Approx(0.25);
        let p = a * b;
        assert!(!p.is_exact());
        assert!((p.to_f64() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn distinct_exact_values_have_positive_distance() {
        let a = Number::Exact(ratio(1, 1));
        let b = Number::Exact(ratio(1, 1) + ratio(1, 1_000_000_000_000_000_000i64));
        assert!(a.distance(&b) > 0.0);
    }
}
