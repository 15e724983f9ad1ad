//! Probability values.
//!
//! Every probability read from a model keeps two representations: an `f64`
//! for simulation and an exact rational for the measure oracle. Arithmetic
//! over either is abstracted by [`Weight`] so that chain construction and
//! cylinder computations can run in both modes.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid probability literal `{literal}`: {reason}")]
pub struct ProbParseError {
    pub literal: String,
    pub reason: &'static str,
}

/// A probability literal, stored exactly and as a float.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Prob {
    exact: Ratio<i64>,
}

impl Prob {
    pub const ONE: Prob = Prob {
        exact: Ratio::new_raw(1, 1),
    };
    pub const ZERO: Prob = Prob {
        exact: Ratio::new_raw(0, 1),
    };

    pub fn new(numer: i64, denom: i64) -> Prob {
        assert!(denom != 0, "zero denominator");
        Prob {
            exact: Ratio::new(numer, denom),
        }
    }

    pub fn value(&self) -> f64 {
        *self.exact.numer() as f64 / *self.exact.denom() as f64
    }

    pub fn exact(&self) -> Ratio<i64> {
        self.exact
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.exact.numer()), BigInt::from(*self.exact.denom()))
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_zero()
    }

    /// Canonical textual form: `n` for integers, `n/d` otherwise.
    pub fn canonical(&self) -> String {
        if *self.exact.denom() == 1 {
            self.exact.numer().to_string()
        } else {
            format!("{}/{}", self.exact.numer(), self.exact.denom())
        }
    }
}

impl fmt::Debug for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical())
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical())
    }
}

impl FromStr for Prob {
    type Err = ProbParseError;

    /// Accepts `p/q`, plain decimals (`0.25`, `.5`, `1`) and decimals with an
    /// exponent (`2.5e-1`). Decimals are converted exactly.
    fn from_str(s: &str) -> Result<Prob, ProbParseError> {
        let err = |reason| ProbParseError {
            literal: s.to_string(),
            reason,
        };
        let t = s.trim();
        if t.is_empty() {
            return Err(err("empty"));
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| err("bad numerator"))?;
            let d: i64 = d.trim().parse().map_err(|_| err("bad denominator"))?;
            if d <= 0 {
                return Err(err("denominator must be positive"));
            }
            return Ok(Prob::new(n, d));
        }
        parse_decimal(t).map(|exact| Prob { exact }).map_err(err)
    }
}

fn parse_decimal(t: &str) -> Result<Ratio<i64>, &'static str> {
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = t[pos + 1..].parse().map_err(|_| "bad exponent")?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err("no digits");
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err("not a number");
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    let scale = frac_part.len() as i32 - exponent;
    let mut numer: i128 = if digits.is_empty() {
        0
    } else {
        digits.parse().map_err(|_| "too many digits")?
    };
    let mut denom: i128 = 1;
    let pow10 = |k: i32| -> Result<i128, &'static str> { 10i128.checked_pow(k as u32).ok_or("exponent out of range") };
    if scale >= 0 {
        denom = pow10(scale)?;
    } else {
        numer = numer.checked_mul(pow10(-scale)?).ok_or("value out of range")?;
    }
    let g = gcd(numer, denom);
    if g > 1 {
        numer /= g;
        denom /= g;
    }
    let numer = i64::try_from(numer).map_err(|_| "too precise")?;
    let denom = i64::try_from(denom).map_err(|_| "too precise")?;
    Ok(Ratio::new(if negative { -numer } else { numer }, denom))
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// Arithmetic used by chain construction and the measure oracle.
pub trait Weight: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_prob(p: &Prob) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn to_f64(&self) -> f64;
    fn render(&self) -> String;
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_prob(p: &Prob) -> Self {
        p.value()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn render(&self) -> String {
        format!("{self}")
    }
}

impl Weight for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_prob(p: &Prob) -> Self {
        p.to_big()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn render(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!("1/2".parse::<Prob>().unwrap(), Prob::new(1, 2));
        assert_eq!("0.5".parse::<Prob>().unwrap(), Prob::new(1, 2));
        assert_eq!(".25".parse::<Prob>().unwrap(), Prob::new(1, 4));
        assert_eq!("1".parse::<Prob>().unwrap(), Prob::ONE);
        assert_eq!("2.5e-1".parse::<Prob>().unwrap(), Prob::new(1, 4));
        assert_eq!("0.1".parse::<Prob>().unwrap(), Prob::new(1, 10));
        assert_eq!("-0.1".parse::<Prob>().unwrap(), Prob::new(-1, 10));
        assert_eq!("3/6".parse::<Prob>().unwrap().canonical(), "1/2");
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1/0", "1/-2", "0.5.5", "1e", "12345678901234567890123"] {
            assert!(bad.parse::<Prob>().is_err(), "{bad}");
        }
    }

    #[test]
    fn canonical_round_trip() {
        for s in ["0", "1", "1/3", "7/16"] {
            assert_eq!(s.parse::<Prob>().unwrap().canonical(), s);
        }
    }
}
