//! Half-open intervals and the n-adic grid.

use std::fmt;

use dashu::integer::IBig;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// A bounded half-open interval `[lo, hi)` with `lo < hi`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Interval {
    lo: ExactRational,
    hi: ExactRational,
}

impl Interval {
    pub fn new(lo: ExactRational, hi: ExactRational) -> Result<Self> {
        if lo >= hi {
            return Err(Error::EmptyInterval { lo: lo.to_string(), hi: hi.to_string() });
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> &ExactRational {
        &self.lo
    }

    pub fn hi(&self) -> &ExactRational {
        &self.hi
    }

    pub fn length(&self) -> ExactRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> ExactRational {
        (&self.lo + &self.hi) / ExactRational::from(2)
    }

    pub fn contains(&self, x: &ExactRational) -> bool {
        &self.lo <= x && x < &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// True when some point lies strictly between the endpoints.
    pub fn has_interior_point(&self, x: &ExactRational) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let lo = ExactRational::max_of(&self.lo, &other.lo).clone();
        let hi = ExactRational::min_of(&self.hi, &other.hi).clone();
        (lo < hi).then_some(Interval { lo, hi })
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }

    /// Shares an endpoint with `other` without overlapping it.
    pub fn is_adjacent(&self, other: &Interval) -> bool {
        self.hi == other.lo || other.hi == self.lo
    }

    pub fn translate(&self, by: &ExactRational) -> Interval {
        Interval { lo: &self.lo + by, hi: &self.hi + by }
    }

    /// Image under `x -> 2c - x`.
    pub fn reflect(&self, center: &ExactRational) -> Interval {
        let two_c = center * ExactRational::from(2);
        Interval { lo: &two_c - &self.hi, hi: two_c - &self.lo }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Interval", 2)?;
        st.serialize_field("lo", &self.lo)?;
        st.serialize_field("hi", &self.hi)?;
        st.end()
    }
}

/// The n-adic interval `[(k-1)/n^m, k/n^m)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct NAdicInterval {
    base: u32,
    level: i32,
    index: IBig,
}

impl NAdicInterval {
    pub fn new(base: u32, level: i32, index: impl Into<IBig>) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidParameter(format!("base must be at least 2, got {base}")));
        }
        Ok(NAdicInterval { base, level, index: index.into() })
    }

    /// The interval of the given level that contains `x`.
    pub fn containing(base: u32, level: i32, x: &ExactRational) -> Result<Self> {
        let scaled = x * ExactRational::int_pow(base as u64, level as i64);
        Self::new(base, level, scaled.floor() + IBig::ONE)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn index(&self) -> &IBig {
        &self.index
    }

    pub fn length(&self) -> ExactRational {
        ExactRational::int_pow(self.base as u64, -(self.level as i64))
    }

    pub fn lo(&self) -> ExactRational {
        ExactRational::from(&self.index - IBig::ONE) * self.length()
    }

    pub fn hi(&self) -> ExactRational {
        ExactRational::from(self.index.clone()) * self.length()
    }

    pub fn to_interval(&self) -> Interval {
        let len = self.length();
        let hi = ExactRational::from(self.index.clone()) * &len;
        Interval { lo: &hi - &len, hi }
    }

    pub fn parent(&self) -> NAdicInterval {
        let n = IBig::from(self.base);
        let k0 = &self.index - IBig::ONE;
        // floor division, valid for negative indices too
        let p = ExactRational::new(k0, n).floor() + IBig::ONE;
        NAdicInterval { base: self.base, level: self.level - 1, index: p }
    }

    /// 1-based position among the parent's children.
    pub fn position(&self) -> u32 {
        let n = IBig::from(self.base);
        let k0 = &self.index - IBig::ONE;
        let q = ExactRational::new(k0.clone(), n.clone()).floor();
        let r = k0 - q * n;
        u32::try_from(r).expect("remainder fits") + 1
    }

    pub fn children(&self) -> Vec<NAdicInterval> {
        nadic_children(self)
    }

    pub fn siblings(&self) -> Vec<NAdicInterval> {
        nadic_siblings(self)
    }
}

impl fmt::Display for NAdicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_interval())
    }
}

impl Serialize for NAdicInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let iv = self.to_interval();
        let mut st = s.serialize_struct("NAdicInterval", 5)?;
        st.serialize_field("base", &self.base)?;
        st.serialize_field("level", &self.level)?;
        st.serialize_field("index", &self.index.to_string())?;
        st.serialize_field("lo", iv.lo())?;
        st.serialize_field("hi", iv.hi())?;
        st.end()
    }
}

/// The `n` children of `j`, left to right.
pub fn nadic_children(j: &NAdicInterval) -> Vec<NAdicInterval> {
    let n = IBig::from(j.base);
    let first = (&j.index - IBig::ONE) * &n;
    (1..=j.base)
        .map(|i| NAdicInterval { base: j.base, level: j.level + 1, index: &first + IBig::from(i) })
        .collect()
}

/// All children of `j`'s parent, `j` included.
pub fn nadic_siblings(j: &NAdicInterval) -> Vec<NAdicInterval> {
    nadic_children(&j.parent())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn iv(a: (i64, i64), b: (i64, i64)) -> Interval {
        Interval::new(q(a.0, a.1), q(b.0, b.1)).unwrap()
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Interval::new(q(1, 2), q(1, 2)).is_err());
        assert!(Interval::new(q(1, 2), q(1, 3)).is_err());
    }

    #[test]
    fn ternary_children_of_unit() {
        let j = NAdicInterval::new(3, 0, 1).unwrap();
        let c: Vec<_> = j.children().iter().map(|c| c.to_interval()).collect();
        assert_eq!(c, vec![iv((0, 1), (1, 3)), iv((1, 3), (2, 3)), iv((2, 3), (1, 1))]);
    }

    #[test]
    fn dyadic_children_of_right_half() {
        let j = NAdicInterval::containing(2, 1, &q(1, 2)).unwrap();
        let c: Vec<_> = j.children().iter().map(|c| c.to_interval()).collect();
        assert_eq!(c, vec![iv((1, 2), (3, 4)), iv((3, 4), (1, 1))]);
    }

    #[test]
    fn quinary_children() {
        let j = NAdicInterval::containing(5, 1, &q(2, 5)).unwrap();
        let c = j.children();
        assert_eq!(c.len(), 5);
        assert_eq!(c[0].lo(), q(2, 5));
        assert!(c.iter().all(|c| c.length() == q(1, 25)));
    }

    #[test]
    fn siblings() {
        let j = NAdicInterval::containing(3, 2, &q(0, 1)).unwrap();
        let s: Vec<_> = j.siblings().iter().map(|c| c.to_interval()).collect();
        assert_eq!(s, vec![iv((0, 1), (1, 9)), iv((1, 9), (2, 9)), iv((2, 9), (3, 9))]);

        let j = NAdicInterval::containing(2, 2, &q(3, 4)).unwrap();
        let s: Vec<_> = j.siblings().iter().map(|c| c.to_interval()).collect();
        assert_eq!(s, vec![iv((1, 2), (3, 4)), iv((3, 4), (1, 1))]);

        let j = NAdicInterval::containing(4, 1, &q(1, 4)).unwrap();
        assert_eq!(j.siblings(), NAdicInterval::new(4, 0, 1).unwrap().children());
    }

    #[test]
    fn negative_indices_and_coarse_levels() {
        let j = NAdicInterval::containing(3, -1, &q(-1, 2)).unwrap();
        assert_eq!(j.to_interval(), iv((-3, 1), (0, 1)));
        let k = NAdicInterval::containing(3, 2, &q(-1, 18)).unwrap();
        assert_eq!(k.parent().to_interval(), iv((-1, 3), (0, 1)));
        assert_eq!(k.position(), 3);
    }
}
