//! Exact rational arithmetic helpers. Decimal literals are rationals, never
//! binary floats.

use alloc::format;
use alloc::string::{String, ToString};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `digits` or `digits.digits` exactly.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut digits = String::from(whole);
    digits.push_str(frac);
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10u32), frac.len());
    Some(Rational::new(numer, denom))
}

/// True when the rational has a terminating decimal expansion.
pub fn is_terminating(value: &Rational) -> bool {
    let mut d = value.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    while d.is_multiple_of(&two) {
        d /= &two;
    }
    while d.is_multiple_of(&five) {
        d /= &five;
    }
    d.is_one()
}

/// Renders a rational as a decimal literal (`2.45`, `5.0`), or as `p/q` when
/// the expansion does not terminate.
pub fn to_decimal_string(value: &Rational) -> String {
    if !is_terminating(value) {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let negative = value.is_negative();
    let abs = value.abs();
    let whole = abs.trunc().to_integer();
    let mut frac = abs.fract();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&whole.to_string());
    out.push('.');
    if frac.is_zero() {
        out.push('0');
        return out;
    }
    let ten = Rational::from_integer(BigInt::from(10u32));
    while !frac.is_zero() {
        frac *= &ten;
        let digit = frac.trunc().to_integer();
        out.push_str(&digit.to_string());
        frac = frac.fract();
    }
    out
}

/// Plain text rendering: integers without a decimal point, other values as
/// `p/q`.
pub fn to_plain_string(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn to_i64(value: &Rational) -> Option<i64> {
    if value.is_integer() {
        value.numer().to_i64()
    } else {
        None
    }
}

pub fn is_one(value: &Rational) -> bool {
    value.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        let v = parse_decimal("2.45").unwrap();
        assert_eq!(v, Rational::new(BigInt::from(49), BigInt::from(20)));
        assert_eq!(to_decimal_string(&v), "2.45");
        assert_eq!(to_decimal_string(&parse_decimal("5.5").unwrap()), "5.5");
        assert_eq!(to_decimal_string(&int(5)), "5.0");
        assert_eq!(to_decimal_string(&-parse_decimal("0.125").unwrap()), "-0.125");
    }

    #[test]
    fn non_terminating_falls_back_to_fraction() {
        let third = Rational::new(BigInt::from(1), BigInt::from(3));
        assert_eq!(to_decimal_string(&third), "1/3");
        assert!(!is_terminating(&third));
    }

    #[test]
    fn malformed_decimals_rejected() {
        assert!(parse_decimal(".5").is_none());
        assert!(parse_decimal("1.2.3").is_none());
        assert!(parse_decimal("1e5").is_none());
    }
}
