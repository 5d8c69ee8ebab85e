use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot read {0:?} as a rational number")]
pub struct ParseRationalError(pub String);

/// Parses `"p/q"`, integers, and decimal literals such as `0.25` or `1.5e-3`
/// into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let t = text.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], i32::from_str(&t[pos + 1..]).map_err(|_| err())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let joined = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if joined.is_empty() { "0" } else { &joined }).map_err(|_| err())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -value } else { value })
}

/// Reads a JSON value that is either a number or a `"p/q"` string.
pub fn rational_from_json(value: &serde_json::Value) -> Result<BigRational, ParseRationalError> {
    match value {
        serde_json::Value::Number(n) => parse_rational(&n.to_string()),
        serde_json::Value::String(s) => parse_rational(s),
        other => Err(ParseRationalError(other.to_string())),
    }
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 fails only when both parts overflow; scale them down.
        let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
        let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Best rational approximation with denominator at most `max_denominator`,
/// by continued fractions.
pub fn approximate_rational(x: f64, max_denominator: u64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let negative = x < 0.0;
    let mut rest = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    for _ in 0..64 {
        let a = rest.floor();
        if a > 1e18 {
            break;
        }
        let a = a as u128;
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        if q2 > max_denominator as u128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = rest - a as f64;
        if frac < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
    }
    if q1 == 0 {
        return None;
    }
    let r = BigRational::new(BigInt::from(p1), BigInt::from(q1));
    Some(if negative { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("0.3").unwrap(), ratio(3, 10));
        assert_eq!(parse_rational("-2").unwrap(), ratio(-2, 1));
        assert_eq!(parse_rational("1.5e-3").unwrap(), ratio(3, 2000));
        assert_eq!(parse_rational("2E2").unwrap(), ratio(200, 1));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn json_numbers_are_read_exactly() {
        let v: serde_json::Value = serde_json::from_str("[0.1, \"2/3\", 5]").unwrap();
        let arr = v.as_array().unwrap();
        assert_eq!(rational_from_json(&arr[0]).unwrap(), ratio(1, 10));
        assert_eq!(rational_from_json(&arr[1]).unwrap(), ratio(2, 3));
        assert_eq!(rational_from_json(&arr[2]).unwrap(), ratio(5, 1));
    }

    #[test]
    fn continued_fraction_recovers_small_rationals() {
        assert_eq!(approximate_rational(1.0 / 3.0, 1000).unwrap(), ratio(1, 3));
        assert_eq!(approximate_rational(-0.625, 1000).unwrap(), ratio(-5, 8));
        assert_eq!(format_rational(&ratio(6, 4)), "3/2");
        assert_eq!(format_rational(&ratio(4, 2)), "2");
    }
}
