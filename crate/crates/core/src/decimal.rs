//! Exact decimal rendering with round-half-even.

use num::bigint::BigInt;
use num::integer::Integer;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

fn pow10(n: usize) -> BigInt {
    num::pow(BigInt::from(10), n)
}

/// `q·10^places` rounded to the nearest integer, ties to even.
pub fn round_scaled(q: &BigRational, places: usize) -> BigInt {
    let scaled = q * BigRational::from_integer(pow10(places));
    let floor = scaled.floor().to_integer();
    let frac = &scaled - BigRational::from_integer(floor.clone());
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if frac > half || (frac == half && floor.is_odd()) {
        floor + 1
    } else {
        floor
    }
}

/// Renders an integer `n` as `n·10^-places`.
pub fn render_scaled(n: &BigInt, places: usize) -> String {
    let digits = n.abs().to_string();
    let sign = if n.is_negative() { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{digits}");
    }
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int, frac) = padded.split_at(padded.len() - places);
    format!("{sign}{int}.{frac}")
}

/// Fixed-point rendering with exactly `places` decimals.
pub fn format_fixed(q: &BigRational, places: usize) -> String {
    render_scaled(&round_scaled(q, places), places)
}

/// Decimal exponent `e` with `10^e ≤ |q| < 10^(e+1)`; `q` must be nonzero.
fn decimal_exponent(q: &BigRational) -> i64 {
    let a = q.abs();
    let approx = {
        let (n, d) = (a.numer().bits() as f64, a.denom().bits() as f64);
        ((n - d) * std::f64::consts::LOG10_2).floor() as i64
    };
    let ten = BigRational::from_integer(BigInt::from(10));
    let power = |e: i64| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(pow10(e as usize))
        } else {
            BigRational::one() / BigRational::from_integer(pow10((-e) as usize))
        }
    };
    let mut e = approx;
    let mut p = power(e);
    while p > a {
        e -= 1;
        p = &p / &ten;
    }
    while &p * &ten <= a {
        e += 1;
        p = &p * &ten;
    }
    e
}

fn strip_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".to_string()
    } else {
        t.to_string()
    }
}

/// Rounds an exact rational to `digits` significant digits (ties to even) and
/// renders it as a JSON-compatible number with trailing zeros removed.
pub fn format_rational_significant(q: &BigRational, digits: usize) -> String {
    assert!(digits >= 1, "at least one significant digit");
    if q.is_zero() {
        return "0".to_string();
    }
    let mut e = decimal_exponent(q);
    let mut scaled = round_at(q, digits as i64 - 1 - e);
    // Rounding can carry into a new leading digit.
    if scaled.abs() >= pow10(digits) {
        e += 1;
        scaled = round_at(q, digits as i64 - 1 - e);
    }
    if scaled.is_zero() {
        return "0".to_string();
    }
    if (-6..21).contains(&e) {
        let places = digits as i64 - 1 - e;
        if places >= 0 {
            strip_zeros(render_scaled(&scaled, places as usize))
        } else {
            (scaled * pow10((-places) as usize)).to_string()
        }
    } else {
        let mantissa = strip_zeros(render_scaled(&scaled, digits - 1));
        format!("{mantissa}e{e}")
    }
}

fn round_at(q: &BigRational, places: i64) -> BigInt {
    if places >= 0 {
        round_scaled(q, places as usize)
    } else {
        let unit = BigRational::from_integer(pow10((-places) as usize));
        round_scaled(&(q / unit), 0)
    }
}

/// Significant-digit rendering of the exact binary value of `x`.
///
/// Non-finite values render as `null`.
pub fn format_significant(x: f64, digits: usize) -> String {
    match BigRational::from_float(x) {
        Some(q) => format_rational_significant(&q, digits),
        None => "null".to_string(),
    }
}
