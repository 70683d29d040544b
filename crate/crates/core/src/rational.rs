//! Exact rational numbers and their textual form.
//!
//! Values travel as `"p/q"` or plain integer strings. Decimal literals are
//! rejected: a silent conversion would change strict-bound semantics.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `"p/q"`, `"p"`, with an optional leading sign.
pub fn parse(text: &str) -> Result<Rational> {
    let err = |reason: &str| Error::Rational {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    let t = text.trim();
    if t.is_empty() {
        return Err(err("empty string"));
    }
    if t.contains(['.', 'e', 'E']) {
        return Err(err(
            "decimal literals are not accepted; write exact rationals as \"p/q\"",
        ));
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (t, None),
    };
    let parse_int = |s: &str| -> Result<BigInt> {
        let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("expected an integer or p/q"));
        }
        s.parse::<BigInt>().map_err(|_| err("expected an integer or p/q"))
    };
    let n = parse_int(num)?;
    let d = match den {
        Some(d) => parse_int(d)?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(n, d))
}

/// Canonical text: `"p"` for integers, `"p/q"` otherwise.
pub fn format(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `base^exp` for a non-negative integer exponent.
pub fn pow(base: &Rational, exp: u32) -> Rational {
    let mut acc = one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    acc
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

/// serde adapter for `Rational` fields stored as strings.
pub mod serde_str {
    use super::Rational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse("1/3").unwrap(), ratio(1, 3));
        assert_eq!(parse("2/4").unwrap(), ratio(1, 2));
        assert_eq!(parse("-3").unwrap(), int(-3));
        assert_eq!(parse(" 7 / 21 ").unwrap(), ratio(1, 3));
        assert_eq!(parse("0").unwrap(), zero());
    }

    #[test]
    fn rejects_decimals_and_garbage() {
        let e = parse("0.5").unwrap_err().to_string();
        assert!(e.contains("p/q"), "{e}");
        assert!(parse("1e3").is_err());
        assert!(parse("1/0").is_err());
        assert!(parse("").is_err());
        assert!(parse("a/b").is_err());
        assert!(parse("1/2/3").is_err());
        assert!(parse("--1").is_err());
    }

    #[test]
    fn canonical_format() {
        assert_eq!(format(&ratio(6, 4)), "3/2");
        assert_eq!(format(&int(1)), "1");
        assert_eq!(format(&ratio(-1, 3)), "-1/3");
    }

    #[test]
    fn integer_powers() {
        assert_eq!(pow(&ratio(3, 2), 2), ratio(9, 4));
        assert_eq!(pow(&ratio(1, 2), 0), one());
        assert_eq!(pow(&ratio(-2, 1), 5), int(-32));
    }
}
