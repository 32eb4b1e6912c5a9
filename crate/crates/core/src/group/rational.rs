use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Exact rational number backed by reduced `i128` fractions. All arithmetic
/// is checked; overflow is reported instead of wrapping.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i128>);

impl Rational {
    pub const fn integer(n: i128) -> Self {
        Self(Ratio::new_raw(n, 1))
    }

    pub fn new(numer: i128, denom: i128) -> Result<Self> {
        if denom == 0 {
            return Err(Error::Invalid("zero denominator".into()));
        }
        Ok(Self(Ratio::new(numer, denom)))
    }

    pub fn zero() -> Self {
        Self(Ratio::zero())
    }

    pub fn one() -> Self {
        Self(Ratio::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        if self.denom() == 1 {
            return self.numer() as f64;
        }
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.0.checked_add(&o.0).map(Self).ok_or(Error::Overflow("rational addition"))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.0.checked_sub(&o.0).map(Self).ok_or(Error::Overflow("rational subtraction"))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.denom() == 1 && o.denom() == 1 {
            return self
                .numer()
                .checked_mul(o.numer())
                .map(Self::integer)
                .ok_or(Error::Overflow("rational multiplication"));
        }
        self.0.checked_mul(&o.0).map(Self).ok_or(Error::Overflow("rational multiplication"))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::Invalid("division by zero".into()));
        }
        self.0.checked_div(&o.0).map(Self).ok_or(Error::Overflow("rational division"))
    }

    pub fn neg(&self) -> Self {
        Self(-self.0)
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    /// Exact parse of `p/q`, an integer, or a finite decimal such as `-0.125`
    /// or `2.5e-3`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Invalid(format!("cannot parse {s:?} as a rational"));
        if let Some((p, q)) = s.split_once('/') {
            let p = i128::from_str(p.trim()).map_err(|_| bad())?;
            let q = i128::from_str(q.trim()).map_err(|_| bad())?;
            return Self::new(p, q);
        }
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(pos) => (&s[..pos], i32::from_str(&s[pos + 1..]).map_err(|_| bad())?),
            None => (s, 0),
        };
        let (neg, body) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let mut numer = i128::from_str(&digits).map_err(|_| bad())?;
        if neg {
            numer = -numer;
        }
        let shift = exp - frac_part.len() as i32;
        let ten_pow = |k: u32| 10i128.checked_pow(k).ok_or(Error::Overflow("decimal exponent"));
        if shift >= 0 {
            let m = numer.checked_mul(ten_pow(shift as u32)?).ok_or(Error::Overflow("decimal"))?;
            Ok(Self::integer(m))
        } else {
            Self::new(numer, ten_pow((-shift) as u32)?)
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::integer(n as i128)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match &v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("expected a rational, got {other}"))),
        };
        Rational::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(Rational::parse("3/6").unwrap(), Rational::new(1, 2).unwrap());
        assert_eq!(Rational::parse("-7").unwrap(), Rational::integer(-7));
        assert_eq!(Rational::parse("0.125").unwrap(), Rational::new(1, 8).unwrap());
        assert_eq!(Rational::parse("-2.5e-1").unwrap(), Rational::new(-1, 4).unwrap());
        assert_eq!(Rational::parse("1e3").unwrap(), Rational::integer(1000));
        assert!(Rational::parse("1/0").is_err());
        assert!(Rational::parse("abc").is_err());
        assert!(Rational::parse("").is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let big = Rational::integer(i128::MAX / 2);
        assert!(matches!(big.mul(&Rational::integer(4)), Err(Error::Overflow(_))));
    }

    #[test]
    fn display_round_trip() {
        for s in ["1/3", "-5", "0", "22/7"] {
            assert_eq!(Rational::parse(s).unwrap().to_string(), s);
        }
    }
}
