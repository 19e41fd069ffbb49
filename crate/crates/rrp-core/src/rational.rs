//! Exact rational arithmetic helpers.
//!
//! Everything cost-like in this crate is a [`Rat`] (`num::BigRational`).
//! The text form is `"p/q"`, or just `"p"` when the denominator is one.

use num::bigint::BigInt;
use num::{BigRational, One, Signed, Zero};
use thiserror::Error;

pub type Rat = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RatParseError {
    #[error("malformed rational `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parse `"p/q"` or `"p"` (optionally signed) into a reduced rational.
pub fn parse_rat(text: &str) -> Result<Rat, RatParseError> {
    let s = text.trim();
    let (num_s, den_s) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let numer: BigInt = num_s.parse().map_err(|_| RatParseError::Malformed(text.to_string()))?;
    let denom: BigInt = match den_s {
        Some(d) => d.parse().map_err(|_| RatParseError::Malformed(text.to_string()))?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(RatParseError::ZeroDenominator(text.to_string()));
    }
    Ok(Rat::new(numer, denom))
}

/// Render as `"p/q"`, or `"p"` for integers.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Approximate decimal rendering (for human consumption only).
pub fn fmt_rat_decimal(r: &Rat, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (r * Rat::from_integer(scale.clone())).round();
    let units = scaled.numer() / &scale;
    let frac = (scaled.numer() % &scale).abs();
    let sign = if r.is_negative() && units.is_zero() { "-" } else { "" };
    format!("{sign}{units}.{:0>width$}", frac, width = digits)
}

pub fn rat_u(n: u64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Binomial coefficient C(n, k) as u64; callers keep n small enough that
/// this cannot overflow (n <= 64 here).
pub fn choose(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial overflow")
}
