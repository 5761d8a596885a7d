//! Rational helpers on top of `BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde_json::Value;

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a finite decimal like `"0.25"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::input(format!("not a rational: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| bad())?;
        let d: BigInt = b.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::input(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let whole: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = whole.abs() * &scale + f;
        let n = if neg { -mag } else { mag };
        return Ok(BigRational::new(n, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Accepts a JSON string (`"1/2"`) or a JSON integer.
pub fn q_from_json(v: &Value) -> Result<Q> {
    match v {
        Value::String(s) => parse_q(s),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(qi(i))
            } else {
                Err(Error::input(format!(
                    "non-integer JSON number {n}; write rationals as \"p/q\" strings"
                )))
            }
        }
        other => Err(Error::input(format!("expected a rational, got {other}"))),
    }
}

pub fn q_to_json(x: &Q) -> Value {
    Value::String(x.to_string())
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn q_abs(x: &Q) -> Q {
    x.abs()
}

pub fn in_unit(x: &Q) -> bool {
    !x.is_negative() && *x <= Q::one()
}

pub fn floor_i(x: &Q) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil_i(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

pub fn mod_floor(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}

/// Uniform rational in `[0, 1]` with the given power-of-two resolution.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, bits: u32) -> Q {
    let den = 1u64 << bits;
    let k = rng.gen_range(0..=den);
    BigRational::new(BigInt::from(k), BigInt::from(den))
}

/// Uniform rational in the open interval `(lo, hi)` on a `2^bits` grid.
/// Falls back to the midpoint when the grid has no interior point.
pub fn random_between<R: Rng + ?Sized>(rng: &mut R, lo: &Q, hi: &Q, bits: u32) -> Q {
    let den = 1u64 << bits;
    let k = rng.gen_range(1..den);
    let t = BigRational::new(BigInt::from(k), BigInt::from(den));
    lo + (hi - lo) * t
}

pub fn max_q<'a>(it: impl IntoIterator<Item = &'a Q>) -> Option<Q> {
    it.into_iter().max().cloned()
}

pub fn pow2_neg(k: u32) -> Q {
    BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(2), k as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse_q("7/10").unwrap(), q(7, 10));
        assert_eq!(parse_q("2/4").unwrap(), q(1, 2));
        assert_eq!(parse_q("-3").unwrap(), qi(-3));
        assert_eq!(parse_q("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_q("-1.5").unwrap(), q(-3, 2));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
    }

    #[test]
    fn prints_lowest_terms() {
        assert_eq!(q(6, 8).to_string(), "3/4");
        assert_eq!(qi(0).to_string(), "0");
    }
}
