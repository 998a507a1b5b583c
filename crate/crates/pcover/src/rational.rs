//! Exact rational arithmetic helpers shared by every module.
//!
//! Costs like `p^|T|` and the dyadic weights `100^-j` underflow f64 quickly,
//! so every certification path runs on [`Rat`] and converts to floats only in
//! reports. Rationals serialize as `"num/den"` strings so exactness survives
//! JSON round trips.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

pub type Rat = BigRational;

/// `num/den` in lowest terms, the canonical wire form for exact numbers.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"3/4"`, `"7"`, or a decimal literal like `"0.25"` exactly.
pub fn rat_from_str(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
        let d = BigInt::from_str(den.trim()).map_err(|e| format!("bad denominator {den:?}: {e}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let int_part = if int_part.is_empty() { "0" } else { int_part };
        let neg = int_part.starts_with('-');
        let i = BigInt::from_str(int_part).map_err(|e| format!("bad number {s:?}: {e}"))?;
        let frac_digits = frac_part.len() as u32;
        let f = BigUint::from_str(frac_part).map_err(|e| format!("bad number {s:?}: {e}"))?;
        let scale = BigInt::from(10u32).pow(frac_digits);
        let frac = Rat::new(BigInt::from(f), scale);
        let whole = Rat::from_integer(i);
        return Ok(if neg { whole - frac } else { whole + frac });
    }
    let n = BigInt::from_str(s).map_err(|e| format!("bad number {s:?}: {e}"))?;
    Ok(Rat::from_integer(n))
}

/// Exact conversion of an f64 (every finite f64 is a dyadic rational).
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back through a scaled division for extreme magnitudes.
        let digits = 30i64;
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = (r * Rat::from_integer(scale)).to_integer();
        scaled.to_f64().map(|v| v / 1e30).unwrap_or(f64::NAN)
    })
}

pub fn rat_u(n: u64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `r^k` for signed integer exponents; `0^0 = 1`.
pub fn rat_pow(r: &Rat, k: i64) -> Rat {
    if k == 0 {
        return Rat::one();
    }
    let mut base = if k < 0 { r.recip() } else { r.clone() };
    let mut e = k.unsigned_abs();
    let mut acc = Rat::one();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// `100^-j` exactly.
pub fn weight_grid(j: u32) -> Rat {
    Rat::new(BigInt::one(), BigInt::from(100u32).pow(j))
}

/// Largest integer `m` with `m <= r`.
pub fn rat_floor(r: &Rat) -> BigInt {
    r.floor().to_integer()
}

/// `floor(r)` as u64; fails on negatives or overflow.
pub fn rat_floor_u64(r: &Rat) -> Option<u64> {
    if r.is_negative() {
        return None;
    }
    rat_floor(r).to_u64()
}

pub fn big_binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

pub fn big_factorial(n: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= BigUint::from(i);
    }
    acc
}

/// A rational that serializes as a `"num/den"` string.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RatStr(pub Rat);

impl fmt::Debug for RatStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", rat_to_string(&self.0))
    }
}

impl fmt::Display for RatStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", rat_to_string(&self.0))
    }
}

impl From<Rat> for RatStr {
    fn from(r: Rat) -> Self {
        RatStr(r)
    }
}

impl Serialize for RatStr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rat_to_string(&self.0))
    }
}

impl<'de> Deserialize<'de> for RatStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        parse_rat_value(&v).map(RatStr).map_err(serde::de::Error::custom)
    }
}

/// Accepts a JSON string (`"1/8"`, `"0.3"`) or number as an exact rational.
pub fn parse_rat_value(v: &serde_json::Value) -> Result<Rat, String> {
    match v {
        serde_json::Value::String(s) => rat_from_str(s),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(rat_i(i))
            } else if let Some(f) = n.as_f64() {
                rat_from_f64(f).ok_or_else(|| format!("non-finite number {n}"))
            } else {
                Err(format!("unrepresentable number {n}"))
            }
        }
        other => Err(format!("expected rational, got {other}")),
    }
}

/// Rational interval bounds for `e`, tight to `2/(terms+1)!`.
///
/// `e = sum 1/i!` and the tail past `terms` is below `2/(terms+1)!`, so the
/// returned pair brackets `e` and shrinks as `terms` grows.
pub fn e_bounds(terms: u32) -> (Rat, Rat) {
    let mut lo = Rat::zero();
    let mut fact = BigInt::one();
    for i in 0..=terms {
        if i > 0 {
            fact *= BigInt::from(i);
        }
        lo += Rat::new(BigInt::one(), fact.clone());
    }
    let next_fact = &fact * BigInt::from(terms + 1);
    let hi = &lo + Rat::new(BigInt::from(2u32), next_fact);
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print_round_trip() {
        for s in ["1/8", "-3/7", "42", "0", "0.25", "-1.5"] {
            let r = rat_from_str(s).unwrap();
            let back = rat_from_str(&rat_to_string(&r)).unwrap();
            assert_eq!(r, back, "{s}");
        }
        assert_eq!(rat_from_str("0.25").unwrap(), Rat::new(1.into(), 4.into()));
        assert!(rat_from_str("1/0").is_err());
    }

    #[test]
    fn pow_and_grid() {
        assert_eq!(rat_pow(&rat_u(2), 10), rat_u(1024));
        assert_eq!(rat_pow(&rat_u(2), -2), Rat::new(1.into(), 4.into()));
        assert_eq!(weight_grid(0), Rat::one());
        assert_eq!(weight_grid(2), Rat::new(1.into(), 10_000.into()));
    }

    #[test]
    fn binomial_and_factorial() {
        assert_eq!(big_binomial(10, 5), BigUint::from(252u32));
        assert_eq!(big_binomial(4, 7), BigUint::zero());
        assert_eq!(big_factorial(6), BigUint::from(720u32));
    }

    #[test]
    fn e_bracket_tightens() {
        let (lo1, hi1) = e_bounds(5);
        let (lo2, hi2) = e_bounds(20);
        assert!(lo1 < lo2 && hi2 < hi1);
        // 24 correct decimals of e, slightly below the true value.
        let e24 = Rat::new(
            BigInt::from_str("2718281828459045235360287").unwrap(),
            BigInt::from(10u32).pow(24),
        );
        assert!(lo2 < e24 && e24 < hi2);
        assert!(&hi2 - &lo2 < rat_from_str("1/1000000000000000").unwrap());
    }

    #[test]
    fn floor_matches_integers() {
        assert_eq!(rat_floor(&rat_from_str("7/2").unwrap()), BigInt::from(3));
        assert_eq!(rat_floor(&rat_from_str("-7/2").unwrap()), BigInt::from(-4));
        assert_eq!(rat_floor_u64(&rat_from_str("5").unwrap()), Some(5));
        assert_eq!(rat_floor_u64(&rat_from_str("-1/2").unwrap()), None);
    }
}
