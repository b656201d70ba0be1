//! Exact arithmetic on rational combinations of square roots.
//!
//! A [`SurdValue`] is `Σ qᵣ·√r` over distinct squarefree radicands `r` (with
//! `r = 1` the rational part). Square roots of distinct squarefree integers
//! are linearly independent over the rationals, so two values are equal iff
//! their coefficient maps are identical. Signs are decided by interval
//! evaluation with integer square roots, doubling the precision until the
//! enclosure excludes zero.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::{BigInt, BigUint, Sign};
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurdParseError {
    #[error("empty surd literal")]
    Empty,
    #[error("cannot parse `{0}` as a surd (expected forms: 3, -2/5, sqrt5, 3/2*sqrt7)")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// `Σ qᵣ·√r` with exact rational `qᵣ` and squarefree `r`.
///
/// Serializes as a map from radicand to rational text, e.g. `{"1": "2", "3": "-3/4"}`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(
    into = "BTreeMap<String, String>",
    try_from = "BTreeMap<String, String>"
)]
pub struct SurdValue {
    terms: BTreeMap<u64, BigRational>,
}

/// Splits `n` into `(s, f)` with `n = s²·f` and `f` squarefree.
fn squarefree_split(mut n: u64) -> (u64, u64) {
    let (mut square, mut free) = (1u64, 1u64);
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        square *= p.pow(e / 2);
        if e % 2 == 1 {
            free *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (square, free * n)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn ratio_from_f64_exact(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

impl SurdValue {
    pub fn zero() -> Self {
        SurdValue::default()
    }

    pub fn one() -> Self {
        SurdValue::from_integer(1)
    }

    pub fn from_integer(n: i64) -> Self {
        SurdValue::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        SurdValue::rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn rational(q: BigRational) -> Self {
        SurdValue::term(q, 1)
    }

    /// Exact binary value of a finite float.
    pub fn from_f64(x: f64) -> Option<Self> {
        ratio_from_f64_exact(x).map(SurdValue::rational)
    }

    /// `√n`, reduced to `s·√f` with `f` squarefree.
    pub fn sqrt(n: u64) -> Self {
        SurdValue::term(BigRational::one(), n)
    }

    /// `q·√n`.
    pub fn term(q: BigRational, n: u64) -> Self {
        let mut v = SurdValue::zero();
        if n == 0 || q.is_zero() {
            return v;
        }
        let (s, f) = squarefree_split(n);
        v.terms
            .insert(f, q * BigRational::from_integer(BigInt::from(s)));
        v
    }

    /// Coefficients keyed by squarefree radicand (1 is the rational part).
    pub fn coefficients(&self) -> &BTreeMap<u64, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|&r| r == 1)
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(
                self.terms
                    .get(&1)
                    .cloned()
                    .unwrap_or_else(BigRational::zero),
            )
        } else {
            None
        }
    }

    fn add_term(&mut self, r: u64, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let entry = self.terms.entry(r).or_insert_with(BigRational::zero);
        *entry += q;
        if entry.is_zero() {
            self.terms.remove(&r);
        }
    }

    pub fn scale(&self, q: &BigRational) -> SurdValue {
        if q.is_zero() {
            return SurdValue::zero();
        }
        SurdValue {
            terms: self.terms.iter().map(|(&r, c)| (r, c * q)).collect(),
        }
    }

    pub fn scale_int(&self, n: u64) -> SurdValue {
        self.scale(&BigRational::from_integer(BigInt::from(n)))
    }

    /// `self / n` for a positive integer `n`.
    pub fn div_int(&self, n: u64) -> SurdValue {
        assert!(n > 0, "division by zero");
        self.scale(&BigRational::new(BigInt::one(), BigInt::from(n)))
    }

    pub fn pow(&self, mut e: u32) -> SurdValue {
        let mut base = self.clone();
        let mut acc = SurdValue::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Floating-point approximation (not rigorous).
    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(&r, q)| q.to_f64().unwrap_or(f64::NAN) * (r as f64).sqrt())
            .sum()
    }

    /// Rational enclosure `[lo, hi]` from square roots truncated to `bits` bits.
    pub fn enclosure(&self, bits: u32) -> (BigRational, BigRational) {
        let denom = BigRational::from_integer(BigInt::one() << bits as usize);
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        for (&r, q) in &self.terms {
            if r == 1 {
                lo += q;
                hi += q;
                continue;
            }
            let scaled: BigUint = BigUint::from(r) << (2 * bits as usize);
            let s = scaled.sqrt();
            let below =
                BigRational::from_integer(BigInt::from_biguint(Sign::Plus, s.clone())) / &denom;
            let above =
                BigRational::from_integer(BigInt::from_biguint(Sign::Plus, s + 1u32)) / &denom;
            if q.is_positive() {
                lo += q * below;
                hi += q * above;
            } else {
                lo += q * above;
                hi += q * below;
            }
        }
        (lo, hi)
    }

    /// Exact sign: -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        if let Some(q) = self.to_rational() {
            return if q.is_positive() { 1 } else { -1 };
        }
        // Float filter: trust the approximation when it clears a generous bound.
        let approx = self.to_f64();
        let mag: f64 = self
            .terms
            .iter()
            .map(|(&r, q)| q.to_f64().unwrap_or(f64::INFINITY).abs() * (r as f64).sqrt())
            .sum();
        if mag.is_finite() && approx.is_finite() && approx.abs() > 1e-9 * mag {
            return if approx > 0.0 { 1 } else { -1 };
        }
        let mut bits = 64;
        loop {
            let (lo, hi) = self.enclosure(bits);
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            bits *= 2;
        }
    }

    /// Rounds to `places` decimal places, half to even, e.g. `"2.236067977497"`.
    pub fn to_decimal(&self, places: usize) -> String {
        if let Some(q) = self.to_rational() {
            return crate::decimal::format_fixed(&q, places);
        }
        // Irrational: never on a rounding tie, so refinement terminates.
        let mut bits = 64 + (places as u32) * 4;
        loop {
            let (lo, hi) = self.enclosure(bits);
            let a = crate::decimal::round_scaled(&lo, places);
            let b = crate::decimal::round_scaled(&hi, places);
            if a == b {
                return crate::decimal::render_scaled(&a, places);
            }
            bits *= 2;
        }
    }
}

impl From<SurdValue> for BTreeMap<String, String> {
    fn from(v: SurdValue) -> Self {
        v.terms
            .iter()
            .map(|(r, q)| (r.to_string(), q.to_string()))
            .collect()
    }
}

impl TryFrom<BTreeMap<String, String>> for SurdValue {
    type Error = SurdParseError;

    fn try_from(map: BTreeMap<String, String>) -> Result<Self, Self::Error> {
        let mut out = SurdValue::zero();
        for (r, q) in &map {
            let radicand: u64 = r
                .parse()
                .map_err(|_| SurdParseError::Malformed(r.clone()))?;
            out = &out + &SurdValue::term(parse_rational(q, q)?, radicand);
        }
        Ok(out)
    }
}

impl PartialOrd for SurdValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SurdValue {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl Add for &SurdValue {
    type Output = SurdValue;
    fn add(self, rhs: &SurdValue) -> SurdValue {
        let mut out = self.clone();
        for (&r, q) in &rhs.terms {
            out.add_term(r, q.clone());
        }
        out
    }
}

impl Sub for &SurdValue {
    type Output = SurdValue;
    fn sub(self, rhs: &SurdValue) -> SurdValue {
        let mut out = self.clone();
        for (&r, q) in &rhs.terms {
            out.add_term(r, -q.clone());
        }
        out
    }
}

impl Neg for &SurdValue {
    type Output = SurdValue;
    fn neg(self) -> SurdValue {
        SurdValue {
            terms: self.terms.iter().map(|(&r, q)| (r, -q.clone())).collect(),
        }
    }
}

impl Mul for &SurdValue {
    type Output = SurdValue;
    fn mul(self, rhs: &SurdValue) -> SurdValue {
        let mut out = SurdValue::zero();
        for (&p, a) in &self.terms {
            for (&q, b) in &rhs.terms {
                // √p·√q = g·√((p/g)(q/g)) with g = gcd(p, q); the radicand stays squarefree.
                let g = gcd(p, q);
                let radicand = (p / g)
                    .checked_mul(q / g)
                    .expect("radicand overflow in surd product");
                out.add_term(radicand, a * b * BigRational::from_integer(BigInt::from(g)));
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for SurdValue {
            type Output = SurdValue;
            fn $m(self, rhs: SurdValue) -> SurdValue {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for SurdValue {
    type Output = SurdValue;
    fn neg(self) -> SurdValue {
        -&self
    }
}

impl fmt::Display for SurdValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (&r, q)) in self.terms.iter().enumerate() {
            let neg = q.is_negative();
            let mag = q.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if r == 1 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "sqrt{r}")?;
            } else {
                write!(f, "{mag}*sqrt{r}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SurdValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SurdValue({self})")
    }
}

fn parse_rational(s: &str, whole: &str) -> Result<BigRational, SurdParseError> {
    let bad = || SurdParseError::Malformed(whole.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(SurdParseError::ZeroDenominator(whole.to_string()));
    }
    Ok(BigRational::new(n, d))
}

/// Parses a single term: an integer, a fraction `p/q`, `sqrtN`, `√N`, or
/// a rational times a root such as `3/2*sqrt7`.
impl FromStr for SurdValue {
    type Err = SurdParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.is_empty() {
            return Err(SurdParseError::Empty);
        }
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest.trim()),
            None => (false, t.strip_prefix('+').unwrap_or(t).trim()),
        };
        let root_at = body
            .find("sqrt")
            .map(|i| (i, 4))
            .or_else(|| body.find('√').map(|i| (i, '√'.len_utf8())));
        let value = match root_at {
            Some((i, len)) => {
                let coef = body[..i].trim().trim_end_matches('*').trim();
                let q = if coef.is_empty() {
                    BigRational::one()
                } else {
                    parse_rational(coef, t)?
                };
                let rad: u64 = body[i + len..]
                    .trim()
                    .trim_start_matches('(')
                    .trim_end_matches(')')
                    .parse()
                    .map_err(|_| SurdParseError::Malformed(t.to_string()))?;
                SurdValue::term(q, rad)
            }
            None => SurdValue::rational(parse_rational(body, t)?),
        };
        Ok(if neg { -value } else { value })
    }
}
