//! Gaussian-rational scalars.
//!
//! Every coefficient in the crate is an exact element of `Q(i)`. Floating
//! point only appears when a norm is requested.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

pub type Scalar = Complex<BigRational>;

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

pub fn int(n: i64) -> Scalar {
    Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
}

pub fn ratio(num: i64, den: i64) -> Scalar {
    Complex::new(BigRational::new(BigInt::from(num), BigInt::from(den)), BigRational::zero())
}

/// `(a/b) + (c/d) i`
pub fn gauss(re: (i64, i64), im: (i64, i64)) -> Scalar {
    Complex::new(
        BigRational::new(BigInt::from(re.0), BigInt::from(re.1)),
        BigRational::new(BigInt::from(im.0), BigInt::from(im.1)),
    )
}

pub fn i_unit() -> Scalar {
    Complex::new(BigRational::zero(), BigRational::one())
}

pub fn to_c64(z: &Scalar) -> Complex<f64> {
    Complex::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}

/// Squared modulus, exact.
pub fn norm_sqr(z: &Scalar) -> BigRational {
    &z.re * &z.re + &z.im * &z.im
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn format(z: &Scalar) -> String {
    if z.im.is_zero() {
        return fmt_rational(&z.re);
    }
    let im = if z.im.is_one() {
        "i".to_string()
    } else if (-z.im.clone()).is_one() {
        "-i".to_string()
    } else {
        format!("{}i", fmt_rational(&z.im))
    };
    if z.re.is_zero() {
        im
    } else if z.im.is_negative() {
        format!("{}{}", fmt_rational(&z.re), im)
    } else {
        format!("{}+{}", fmt_rational(&z.re), im)
    }
}

fn rational_from_json(v: &Value) -> Result<BigRational> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(BigInt::from(i)))
            } else if let Some(f) = n.as_f64() {
                BigRational::from_float(f).ok_or_else(|| Error::Parse(format!("bad number {f}")))
            } else {
                Err(Error::Parse(format!("bad number {n}")))
            }
        }
        Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("expected a number, found {other}"))),
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            if let Ok(n) = s.parse::<BigInt>() {
                return Ok(BigRational::from_integer(n));
            }
            let f: f64 = s.parse().map_err(|_| bad())?;
            BigRational::from_float(f).ok_or_else(bad)
        }
    }
}

/// Reads `[re, im]`; a bare number is taken as real.
pub fn from_json(v: &Value) -> Result<Scalar> {
    match v {
        Value::Array(parts) if parts.len() == 2 => {
            Ok(Complex::new(rational_from_json(&parts[0])?, rational_from_json(&parts[1])?))
        }
        Value::Array(parts) => {
            Err(Error::Parse(format!("complex entry must be [re, im], found {} components", parts.len())))
        }
        other => Ok(Complex::new(rational_from_json(other)?, BigRational::zero())),
    }
}

fn rational_to_json(q: &BigRational) -> Value {
    if q.is_integer() {
        if let Some(i) = q.numer().to_i64() {
            return Value::from(i);
        }
    }
    Value::from(fmt_rational(q))
}

pub fn to_json(z: &Scalar) -> Value {
    Value::Array(vec![rational_to_json(&z.re), rational_to_json(&z.im)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(format(&int(3)), "3");
        assert_eq!(format(&ratio(-1, 2)), "-1/2");
        assert_eq!(format(&gauss((3, 5), (-4, 5))), "3/5-4/5i");
        assert_eq!(format(&i_unit()), "i");
    }

    #[test]
    fn json_roundtrip() {
        let z = gauss((3, 5), (7, 1));
        assert_eq!(from_json(&to_json(&z)).unwrap(), z);
        assert_eq!(from_json(&serde_json::json!(2)).unwrap(), int(2));
        assert!(from_json(&serde_json::json!([1, 2, 3])).is_err());
        assert!(parse_rational("1/0").is_err());
    }
}
