//! Arbitrary-precision rationals, always in lowest terms.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use dashu::base::{Abs, BitTest, Sign, UnsignedAbs};
use dashu::integer::{IBig, UBig};
use dashu::rational::RBig;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactRational(RBig);

impl ExactRational {
    pub fn zero() -> Self {
        ExactRational(RBig::ZERO)
    }

    pub fn one() -> Self {
        ExactRational(RBig::ONE)
    }

    /// `num / den`; panics when `den` is zero.
    pub fn new(num: impl Into<IBig>, den: impl Into<IBig>) -> Self {
        Self::try_new(num, den).expect("zero denominator")
    }

    pub fn try_new(num: impl Into<IBig>, den: impl Into<IBig>) -> Option<Self> {
        let den: IBig = den.into();
        if den == IBig::ZERO {
            return None;
        }
        Some(ExactRational(RBig::from_parts_signed(num.into(), den)))
    }

    pub fn from_integer(i: impl Into<IBig>) -> Self {
        ExactRational(RBig::from(i.into()))
    }

    /// `2^e` for any integer `e`.
    pub fn pow2(e: i64) -> Self {
        let p = UBig::ONE << (e.unsigned_abs() as usize);
        if e >= 0 {
            ExactRational(RBig::from(p))
        } else {
            ExactRational(RBig::from_parts(IBig::ONE, p))
        }
    }

    /// `n^e` for an integer base and any integer exponent.
    pub fn int_pow(n: u64, e: i64) -> Self {
        let p = UBig::from(n).pow(e.unsigned_abs() as usize);
        if e >= 0 {
            ExactRational(RBig::from(p))
        } else {
            ExactRational(RBig::from_parts(IBig::ONE, p))
        }
    }

    pub fn numer(&self) -> &IBig {
        self.0.numerator()
    }

    pub fn denom(&self) -> &UBig {
        self.0.denominator()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.sign() == Sign::Positive && !self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.sign() == Sign::Negative
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_int()
    }

    pub fn abs(&self) -> Self {
        ExactRational(self.0.clone().abs())
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        ExactRational(RBig::ONE / &self.0)
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, e: i32) -> Self {
        let p = ExactRational(self.0.pow(e.unsigned_abs() as usize));
        if e < 0 {
            p.recip()
        } else {
            p
        }
    }

    pub fn floor(&self) -> IBig {
        self.0.floor()
    }

    pub fn ceil(&self) -> IBig {
        self.0.ceil()
    }

    /// Nearest double, for human-facing summaries only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    /// Approximate `log2|self|` that stays finite far outside the `f64`
    /// range; only a starting point for exact searches.
    pub fn log2_approx(&self) -> f64 {
        assert!(!self.is_zero(), "log of zero");
        let v = self.abs().to_f64();
        if v.is_normal() {
            return v.log2();
        }
        self.numer().unsigned_abs().bit_len() as f64 - self.denom().bit_len() as f64
    }

    pub fn max_of<'a>(a: &'a Self, b: &'a Self) -> &'a Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    pub fn min_of<'a>(a: &'a Self, b: &'a Self) -> &'a Self {
        if a <= b {
            a
        } else {
            b
        }
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numerator(), self.0.denominator())
    }
}

impl fmt::Debug for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(s: &str) -> Option<IBig> {
    let s = s.trim();
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    IBig::from_str(s.strip_prefix('+').unwrap_or(s)).ok()
}

impl FromStr for ExactRational {
    type Err = Error;

    /// Accepts `n/d`, a plain integer, or a finite decimal such as `0.001`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse { line: 0, msg: format!("not a rational: {s:?}") };
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = parse_int(n).ok_or_else(bad)?;
            let d = parse_int(d).ok_or_else(bad)?;
            return ExactRational::try_new(n, d).ok_or_else(bad);
        }
        if let Some((ip, fp)) = s.split_once('.') {
            if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = ip.trim_start().starts_with('-');
            let ip = if ip == "-" || ip == "+" || ip.is_empty() { IBig::ZERO } else { parse_int(ip).ok_or_else(bad)? };
            let scale = IBig::from(10u8).pow(fp.len());
            let frac = IBig::from_str(fp).map_err(|_| bad())?;
            let mag = ip.abs() * &scale + frac;
            let num = if negative { -mag } else { mag };
            return Ok(ExactRational::new(num, scale));
        }
        parse_int(s).map(ExactRational::from_integer).ok_or_else(bad)
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
            Raw::Int(i) => Ok(ExactRational::from_integer(i)),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr<ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: ExactRational) -> ExactRational {
                ExactRational((self.0).$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational((self.0).$m(&rhs.0))
            }
        }
        impl<'a> $tr<ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: ExactRational) -> ExactRational {
                ExactRational((&self.0).$m(rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: &'b ExactRational) -> ExactRational {
                ExactRational((&self.0).$m(&rhs.0))
            }
        }
        impl $atr<ExactRational> for ExactRational {
            fn $am(&mut self, rhs: ExactRational) {
                self.0 = std::mem::take(&mut self.0).$m(rhs.0);
            }
        }
        impl<'a> $atr<&'a ExactRational> for ExactRational {
            fn $am(&mut self, rhs: &'a ExactRational) {
                self.0 = std::mem::take(&mut self.0).$m(&rhs.0);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Div, div, DivAssign, div_assign);

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl Neg for &ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0.clone())
    }
}

impl Sum for ExactRational {
    fn sum<I: Iterator<Item = ExactRational>>(iter: I) -> Self {
        iter.fold(ExactRational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a ExactRational> for ExactRational {
    fn sum<I: Iterator<Item = &'a ExactRational>>(iter: I) -> Self {
        iter.fold(ExactRational::zero(), |acc, x| acc + x)
    }
}

impl Product for ExactRational {
    fn product<I: Iterator<Item = ExactRational>>(iter: I) -> Self {
        iter.fold(ExactRational::one(), |acc, x| acc * x)
    }
}

macro_rules! from_int {
    ($($t:ty),*) => {$(
        impl From<$t> for ExactRational {
            fn from(v: $t) -> Self {
                ExactRational::from_integer(v)
            }
        }
    )*};
}

from_int!(i32, i64, u32, u64, usize);

impl From<IBig> for ExactRational {
    fn from(v: IBig) -> Self {
        ExactRational(RBig::from(v))
    }
}

impl From<UBig> for ExactRational {
    fn from(v: UBig) -> Self {
        ExactRational(RBig::from(v))
    }
}

impl PartialEq<i64> for ExactRational {
    fn eq(&self, other: &i64) -> bool {
        self.0 == RBig::from(*other)
    }
}

impl PartialOrd<i64> for ExactRational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0.partial_cmp(&RBig::from(*other))
    }
}

/// Shorthand for `ExactRational::new(n, d)` with machine integers.
pub fn q(n: i64, d: i64) -> ExactRational {
    ExactRational::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_display() {
        assert_eq!(q(6, -8).to_string(), "-3/4");
        assert_eq!(q(4, 2).to_string(), "2/1");
        assert_eq!(ExactRational::zero().to_string(), "0/1");
    }

    #[test]
    fn parses_all_forms() {
        assert_eq!("7/500".parse::<ExactRational>().unwrap(), q(7, 500));
        assert_eq!("-3".parse::<ExactRational>().unwrap(), q(-3, 1));
        assert_eq!("0.001".parse::<ExactRational>().unwrap(), q(1, 1000));
        assert_eq!("-1.25".parse::<ExactRational>().unwrap(), q(-5, 4));
        assert!("1/0".parse::<ExactRational>().is_err());
        assert!("abc".parse::<ExactRational>().is_err());
        assert!("1.".parse::<ExactRational>().is_err());
    }

    #[test]
    fn arithmetic_and_powers() {
        let a = q(2, 3);
        let b = q(4, 3);
        assert_eq!(&a + &b, q(2, 1));
        assert_eq!(&b / &a, q(2, 1));
        assert_eq!(a.pow(-2), q(9, 4));
        assert_eq!(q(-2, 3).recip(), q(-3, 2));
        assert_eq!(ExactRational::pow2(-3), q(1, 8));
        assert_eq!(ExactRational::int_pow(3, 2), q(9, 1));
        assert_eq!(q(-7, 2).floor(), IBig::from(-4));
        assert_eq!(q(-7, 2).ceil(), IBig::from(-3));
    }

    #[test]
    fn serde_round_trip() {
        let v = q(-22, 7);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "\"-22/7\"");
        let back: ExactRational = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
