//! Exact rational scalars: thin helpers over `num_rational::BigRational`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = num_rational::BigRational;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// 2^n with n possibly negative.
pub fn pow2(n: i32) -> Rat {
    let two = Rat::from_integer(BigInt::from(2));
    two.pow(n)
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// The exact rational value of a finite f64.
pub fn from_f64(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}

/// Parse "p/q" or "p" with optional sign. Used for all rational literals in
/// configurations so that no decimal parsing is ever involved.
pub fn parse(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = |m: &str| Error::Domain(format!("malformed rational {s:?}: {m}"));
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| bad("expected an integer"))
    };
    match s.split_once('/') {
        None => Ok(Rat::from_integer(parse_int(s)?)),
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(bad("zero denominator"));
            }
            Ok(Rat::new(parse_int(p)?, den))
        }
    }
}

/// Render as "p/q", or "p" when the denominator is 1.
pub fn format(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn abs(r: &Rat) -> Rat {
    if r.is_negative() {
        -r.clone()
    } else {
        r.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_roundtrip() {
        for s in ["0", "1", "1/2", "-3/7", "10/4"] {
            let r = parse(s).unwrap();
            let back = parse(&format(&r)).unwrap();
            assert_eq!(r, back);
        }
        assert_eq!(parse("10/4").unwrap(), ratio(5, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("a/b").is_err());
        assert!(parse("0.5").is_err());
    }

    #[test]
    fn pow2_negative() {
        assert_eq!(pow2(-3), ratio(1, 8));
        assert_eq!(pow2(4), int(16));
    }
}
