//! Exact decimal rates (word error rates, sample fractions, test fractions).
//!
//! Rates are stored as reduced fractions and `round_half_up(rate * n)` is
//! exact: `0.05 * 30` is `3/2` here, not `1.5000000000000002`.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RateError {
    #[error("invalid rate {0:?}: expected a decimal such as 0.25")]
    Syntax(String),
    #[error("rate {0} is outside {1}")]
    OutOfRange(Rate, &'static str),
}

/// A non-negative rational number `num / den` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rate {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rate {
    pub fn new(num: u64, den: u64) -> Rate {
        assert!(den > 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Rate { num: num / g, den: den / g }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `round_half_up(self * n)`, computed in integer arithmetic.
    pub fn round_half_up_of(&self, n: usize) -> usize {
        let n = n as u128;
        let (num, den) = (self.num as u128, self.den as u128);
        ((2 * num * n + den) / (2 * den)) as usize
    }

    /// `floor(self * n)` and the remainder numerator (over `den`).
    pub fn floor_of(&self, n: usize) -> (usize, u64) {
        let prod = self.num as u128 * n as u128;
        ((prod / self.den as u128) as usize, (prod % self.den as u128) as u64)
    }

    /// Require `0 < self < 1`.
    pub fn check_open_unit(self) -> Result<Rate, RateError> {
        if self.num == 0 || self.num >= self.den {
            return Err(RateError::OutOfRange(self, "(0, 1)"));
        }
        Ok(self)
    }

    /// Require `0 < self <= 1`.
    pub fn check_half_open_unit(self) -> Result<Rate, RateError> {
        if self.num == 0 || self.num > self.den {
            return Err(RateError::OutOfRange(self, "(0, 1]"));
        }
        Ok(self)
    }
}

impl FromStr for Rate {
    type Err = RateError;

    fn from_str(s: &str) -> Result<Rate, RateError> {
        let bad = || RateError::Syntax(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let num: u64 = n.trim().parse().map_err(|_| bad())?;
            let den: u64 = d.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(Rate::new(num, den));
        }
        let (int_part, frac_part) = t.split_once('.').unwrap_or((t, ""));
        if (int_part.is_empty() && frac_part.is_empty())
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
            || frac_part.len() > 12
        {
            return Err(bad());
        }
        let den = 10u64.pow(frac_part.len() as u32);
        let int: u64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
        let frac: u64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad())? };
        let num = int.checked_mul(den).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
        Ok(Rate::new(num, den))
    }
}

impl fmt::Display for Rate {
    /// Shortest exact decimal when one exists (`0.05`, `0.5`, `1`), else `n/d`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = self.den;
        while d.is_multiple_of(2) {
            d /= 2;
        }
        while d.is_multiple_of(5) {
            d /= 5;
        }
        if d != 1 {
            return write!(f, "{}/{}", self.num, self.den);
        }
        let int = self.num / self.den;
        let mut rem = self.num % self.den;
        if rem == 0 {
            return write!(f, "{int}");
        }
        let mut digits = String::new();
        while rem != 0 {
            rem *= 10;
            digits.push(char::from(b'0' + (rem / self.den) as u8));
            rem %= self.den;
        }
        write!(f, "{int}.{digits}")
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Rate, D::Error> {
        struct RateVisitor;

        impl Visitor<'_> for RateVisitor {
            type Value = Rate;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal rate as number or string")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rate, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rate, E> {
                // Display of f64 is the shortest round-tripping decimal.
                self.visit_str(&v.to_string())
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rate, E> {
                Ok(Rate::new(v, 1))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rate, E> {
                u64::try_from(v).map(|v| Rate::new(v, 1)).map_err(|_| E::custom("negative rate"))
            }
        }

        d.deserialize_any(RateVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!("0.05".parse::<Rate>().unwrap(), Rate::new(1, 20));
        assert_eq!("0.10".parse::<Rate>().unwrap(), Rate::new(1, 10));
        assert_eq!("1".parse::<Rate>().unwrap(), Rate::new(1, 1));
        assert_eq!(".5".parse::<Rate>().unwrap(), Rate::new(1, 2));
        assert_eq!("3/8".parse::<Rate>().unwrap(), Rate::new(3, 8));
        assert!("-0.1".parse::<Rate>().is_err());
        assert!("abc".parse::<Rate>().is_err());
        assert!(".".parse::<Rate>().is_err());
    }

    #[test]
    fn displays_shortest_decimal() {
        for s in ["0.05", "0.1", "0.25", "0.5", "1", "0.75"] {
            assert_eq!(s.parse::<Rate>().unwrap().to_string(), s);
        }
        assert_eq!(Rate::new(1, 3).to_string(), "1/3");
    }

    #[test]
    fn round_half_up_is_exact() {
        let r: Rate = "0.05".parse().unwrap();
        assert_eq!(r.round_half_up_of(30), 2); // 1.5 -> 2
        assert_eq!(r.round_half_up_of(29), 1); // 1.45 -> 1
        assert_eq!(r.round_half_up_of(10), 1); // 0.5 -> 1
        let r: Rate = "0.1".parse().unwrap();
        assert_eq!(r.round_half_up_of(20), 2);
        assert_eq!(r.round_half_up_of(25), 3);
        assert_eq!(r.round_half_up_of(24), 2);
        let r: Rate = "0.25".parse().unwrap();
        assert_eq!(r.round_half_up_of(11832), 2958);
    }

    #[test]
    fn range_checks() {
        assert!(Rate::new(0, 1).check_half_open_unit().is_err());
        assert!(Rate::new(1, 1).check_half_open_unit().is_ok());
        assert!(Rate::new(1, 1).check_open_unit().is_err());
        assert!(Rate::new(5, 4).check_half_open_unit().is_err());
    }

    #[test]
    fn deserializes_numbers_and_strings() {
        let v: Vec<Rate> = serde_json::from_str(r#"[0.1, "0.25", 1]"#).unwrap();
        assert_eq!(v, vec![Rate::new(1, 10), Rate::new(1, 4), Rate::new(1, 1)]);
    }
}
