//! Arbitrary-precision rationals and their string form.
//!
//! The coefficient field for all exact data is `num_rational::BigRational`,
//! which already keeps values in lowest terms with a positive denominator.
//! Serialized form is the decimal string `"a/b"`, with `/b` omitted when `b = 1`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    Rational::from_str(t).map_err(|_| Error::InvalidInput(format!("malformed rational {s:?}")))
}

pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

/// Sign as -1, 0 or +1.
pub fn sign(q: &Rational) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    match q.to_f64() {
        Some(x) if x.is_finite() => x,
        _ => {
            // Huge numerator and denominator: scale both down before dividing.
            let n = q.numer();
            let d = q.denom();
            let shift = n.bits().max(d.bits()).saturating_sub(1000);
            let nf = (n >> shift).to_f64().unwrap_or(f64::NAN);
            let df = (d >> shift).to_f64().unwrap_or(f64::NAN);
            nf / df
        }
    }
}

/// Nearest rational with denominator at most `max_den` (continued fractions),
/// accepted only if it lies within `tol` of `x`.
pub fn rationalize(x: f64, max_den: u64, tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let y = x.abs();
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut frac = y;
    let mut best: Option<(i128, i128)> = None;
    for _ in 0..64 {
        let a = frac.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        best = Some((h2, k2));
        if ((h2 as f64) / (k2 as f64) - y).abs() <= tol * 1e-3 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let r = frac - a as f64;
        if r.abs() < 1e-18 {
            break;
        }
        frac = 1.0 / r;
    }
    let (h, k) = best?;
    if ((h as f64) / (k as f64) - y).abs() > tol {
        return None;
    }
    let q = Rational::new(BigInt::from(h), BigInt::from(k));
    Some(if neg { -q } else { q })
}

/// Exact rational value of a finite double.
pub fn from_f64_exact(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

/// `round(x * 2^bits) / 2^bits` as an exact rational.
pub fn dyadic_round(x: f64, bits: u32) -> Rational {
    let scale = (bits as f64).exp2();
    let m = (x * scale).round();
    Rational::new(
        BigInt::from_str(&format!("{m:.0}")).unwrap_or_default(),
        BigInt::one() << bits as usize,
    )
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

pub mod serde_rational {
    //! `#[serde(with = ...)]` adapters for rationals as `"a/b"` strings.
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(
            v: &[Rational],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for q in v {
                seq.serialize_element(&format_rational(q))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Rational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| parse_rational(s).map_err(de::Error::custom))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_form() {
        assert_eq!(format_rational(&ratio(6, -4)), "-3/2");
        assert_eq!(format_rational(&rat(7)), "7");
        assert_eq!(parse_rational(" -3/2 ").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational("4/8").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn rationalize_recovers_small_fractions() {
        assert_eq!(rationalize(0.75, 1000, 1e-12), Some(ratio(3, 4)));
        assert_eq!(rationalize(-1.0 / 3.0, 1000, 1e-12), Some(ratio(-1, 3)));
        assert_eq!(rationalize(2.0f64.sqrt(), 1000, 1e-9), None);
        assert_eq!(rationalize(0.0, 10, 1e-12), Some(rat(0)));
    }

    #[test]
    fn huge_values_convert() {
        let big = Rational::new(BigInt::from(10).pow(400), BigInt::from(10).pow(399) * 4);
        assert!((to_f64(&big) - 2.5).abs() < 1e-12);
        assert_eq!(dyadic_round(0.3, 4), ratio(5, 16));
    }
}
