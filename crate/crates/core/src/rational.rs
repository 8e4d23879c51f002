//! Exact rational numbers used for delays, stoichiometry and rates.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// Largest number of decimal places printed before falling back to `p/q`.
const MAX_DECIMALS: u32 = 15;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact binary value of a finite float.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Parses an integer, a decimal (`0.25`, `-3.`, `.5`) or a fraction `p/q`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_decimal(num.trim())?;
        let den = parse_decimal(den.trim())?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (negative, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = BigInt::from(10u32).pow(frac.len() as u32);
    let value = Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}

/// Canonical text form: integers plainly, terminating decimals with up to
/// fifteen places, everything else as `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    if let Some(decimal) = terminating_decimal(r) {
        return decimal;
    }
    format!("{}/{}", r.numer(), r.denom())
}

fn terminating_decimal(r: &Rational) -> Option<String> {
    let mut den = r.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let (mut twos, mut fives) = (0u32, 0u32);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let places = twos.max(fives);
    if places > MAX_DECIMALS {
        return None;
    }
    let scaled = (r.abs() * Rational::from_integer(BigInt::from(10u32).pow(places))).to_integer();
    let mut digits = scaled.to_string();
    while digits.len() <= places as usize {
        digits.insert(0, '0');
    }
    let split = digits.len() - places as usize;
    let sign = if r.is_negative() { "-" } else { "" };
    Some(format!("{sign}{}.{}", &digits[..split], &digits[split..]))
}

/// Greatest common divisor of positive rationals: gcd of numerators over lcm of denominators.
pub fn gcd_all<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
    use num_integer::Integer;
    let mut acc: Option<(BigInt, BigInt)> = None;
    for v in values {
        if !v.is_positive() {
            continue;
        }
        let (n, d) = (v.numer().clone(), v.denom().clone());
        acc = Some(match acc {
            None => (n, d),
            Some((an, ad)) => (an.gcd(&n), ad.lcm(&d)),
        });
    }
    acc.map(|(n, d)| Rational::new(n, d))
}
