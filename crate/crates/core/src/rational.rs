//! Exact rational values used for LP assignments and objective weights.

use core::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedDiv, One, ToPrimitive, Zero};

use crate::prelude::*;

/// Exact rational number. Solver output is parsed into this without rounding.
pub type Rational = Ratio<i128>;

/// Reasons a decimal string could not be read as a rational.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecimalError {
    #[error("`{0}` is not a number")]
    Syntax(String),
    #[error("`{0}` has too many digits to represent exactly")]
    Precision(String),
}

/// Parses decimal notation (`-1`, `0.25`, `3e-7`, `1.5E+2`) exactly.
///
/// Also accepts `p/q` fractions, which the generic solution format allows.
pub fn parse_decimal(text: &str) -> Result<Rational, DecimalError> {
    let s = text.trim();
    let syntax = || DecimalError::Syntax(s.to_string());
    let precision = || DecimalError::Precision(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_decimal(n)?;
        let d = parse_decimal(d)?;
        if d.is_zero() {
            return Err(syntax());
        }
        return n.checked_div(&d).ok_or_else(precision);
    }
    let (neg, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(k) => {
            let e: i32 = body[k + 1..].parse().map_err(|_| syntax())?;
            (&body[..k], e)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(syntax());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(syntax());
    }
    let mut num: i128 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        num = num.checked_mul(10).and_then(|v| v.checked_add(i128::from(b - b'0'))).ok_or_else(precision)?;
    }
    let scale = exp - frac_part.len() as i32;
    let pow = |k: u32| 10i128.checked_pow(k).ok_or_else(precision);
    let value = if scale >= 0 {
        Rational::from_integer(num.checked_mul(pow(scale as u32)?).ok_or_else(precision)?)
    } else {
        Rational::new(num, pow(scale.unsigned_abs())?)
    };
    Ok(if neg { -value } else { value })
}

/// Converts to a big rational for overflow-free accumulation.
pub fn to_big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Nearest `f64`, used only for display and solver-facing text.
pub fn to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(0.0) / r.denom().to_f64().unwrap_or(1.0)
}

/// Writes `r` as a finite decimal when it has one with at most 18 digits
/// after the point, otherwise as a 17-significant-digit approximation.
pub fn write_decimal(f: &mut dyn fmt::Write, r: &Rational) -> fmt::Result {
    if r.is_integer() {
        return write!(f, "{}", r.numer());
    }
    let mut den = *r.denom();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    let digits = twos.max(fives);
    if den == 1 && digits <= 18 {
        let scaled = r * Rational::from_integer(10i128.pow(digits));
        let n = scaled.to_integer();
        let sign = if n.is_negative() { "-" } else { "" };
        let n = n.unsigned_abs();
        let p = 10u128.pow(digits);
        let frac = format!("{:0width$}", n % p, width = digits as usize);
        return write!(f, "{sign}{}.{}", n / p, frac.trim_end_matches('0'));
    }
    write!(f, "{:.17e}", to_f64(r))
}

/// Returns `true` when `r` is exactly 0 or 1.
pub fn is_binary(r: &Rational) -> bool {
    r.is_zero() || r.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec(r: Rational) -> String {
        let mut s = String::new();
        write_decimal(&mut s, &r).unwrap();
        s
    }

    #[test]
    fn parses_plain_and_scientific() {
        assert_eq!(parse_decimal("1").unwrap(), Rational::from_integer(1));
        assert_eq!(parse_decimal("-0.25").unwrap(), Rational::new(-1, 4));
        assert_eq!(parse_decimal("3e-7").unwrap(), Rational::new(3, 10_000_000));
        assert_eq!(parse_decimal("1.5E+2").unwrap(), Rational::from_integer(150));
        assert_eq!(parse_decimal(".5").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_decimal("2/6").unwrap(), Rational::new(1, 3));
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("").is_err());
        assert!(parse_decimal("1e400").is_err());
    }

    #[test]
    fn decimal_round_trip() {
        for (n, d) in [(1, 2), (-3, 8), (7, 1), (1, 1000), (123_456_789, 100_000)] {
            let r = Rational::new(n, d);
            assert_eq!(parse_decimal(&dec(r)).unwrap(), r);
        }
        assert!(dec(Rational::new(1, 3)).contains('e'));
    }
}
