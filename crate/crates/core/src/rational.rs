//! Exact rational helpers shared by the frameworks, the file format and the reports.

use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rational = num::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `3`, `-2`, `1/2` or `0.25`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{}{}", if whole_digits.is_empty() { "0" } else { whole_digits }, frac);
        let mut num: BigInt = digits.parse().ok()?;
        if negative {
            num = -num;
        }
        let den = num::pow(BigInt::from(10), frac.len());
        return Some(Rational::new(num, den));
    }
    let num: BigInt = text.parse().ok()?;
    Some(Rational::from_integer(num))
}

/// Exact rendering: `n` for integers, `n/d` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering rounded to `digits` fractional digits.
pub fn format_decimal(r: &Rational, digits: usize) -> String {
    let scale = num::pow(BigInt::from(10), digits);
    let scaled = r * Rational::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let negative = rounded.is_negative();
    let abs = rounded.abs();
    let int_part = &abs / &scale;
    let frac_part = &abs % &scale;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if digits > 0 {
        out.push('.');
        out.push_str(&format!("{:0>width$}", frac_part.to_string(), width = digits));
    }
    out
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
