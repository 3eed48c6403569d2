//! Piecewise-constant densities and their exact integrals.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::ExactRational;

/// Anything that can assign an exact mass to a bounded interval.
pub trait Measure {
    fn measure(&self, i: &Interval) -> Result<ExactRational>;
}

/// A positive step function: `values[i]` on `[breakpoints[i], breakpoints[i+1])`,
/// `tail` everywhere outside `[breakpoints[0], breakpoints[m])`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct StepDensity {
    breakpoints: Vec<ExactRational>,
    values: Vec<ExactRational>,
    tail: ExactRational,
}

impl StepDensity {
    pub fn new(breakpoints: Vec<ExactRational>, values: Vec<ExactRational>, tail: ExactRational) -> Result<Self> {
        if breakpoints.is_empty() {
            if !values.is_empty() {
                return Err(Error::InvalidDensity("values given without breakpoints".into()));
            }
        } else if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidDensity(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDensity("breakpoints must be strictly increasing".into()));
        }
        if !tail.is_positive() || values.iter().any(|v| !v.is_positive()) {
            return Err(Error::InvalidDensity("values must be strictly positive".into()));
        }
        Ok(StepDensity { breakpoints, values, tail })
    }

    /// The constant density `c` (no breakpoints).
    pub fn constant(c: ExactRational) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), c)
    }

    /// Lebesgue measure.
    pub fn lebesgue() -> Self {
        StepDensity { breakpoints: Vec::new(), values: Vec::new(), tail: ExactRational::one() }
    }

    /// Builds a density from abutting pieces listed left to right.
    pub fn from_pieces(pieces: Vec<(Interval, ExactRational)>, tail: ExactRational) -> Result<Self> {
        if pieces.is_empty() {
            return Self::constant(tail);
        }
        let mut bps = vec![pieces[0].0.lo().clone()];
        let mut vals = Vec::with_capacity(pieces.len());
        for (iv, v) in pieces {
            if iv.lo() != bps.last().unwrap() {
                return Err(Error::InvalidDensity(format!("piece {iv} does not abut its predecessor")));
            }
            bps.push(iv.hi().clone());
            vals.push(v);
        }
        Self::new(bps, vals, tail)
    }

    pub fn breakpoints(&self) -> &[ExactRational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[ExactRational] {
        &self.values
    }

    pub fn tail(&self) -> &ExactRational {
        &self.tail
    }

    pub fn piece_count(&self) -> usize {
        self.values.len()
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|v| *v == self.tail)
    }

    pub fn pieces(&self) -> Vec<(Interval, ExactRational)> {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (Interval::new(w[0].clone(), w[1].clone()).unwrap(), v.clone()))
            .collect()
    }

    /// Smallest interval outside which the density equals its tail.
    pub fn hull(&self) -> Option<Interval> {
        let (a, b) = (self.breakpoints.first()?, self.breakpoints.last()?);
        Interval::new(a.clone(), b.clone()).ok()
    }

    pub fn value_at(&self, x: &ExactRational) -> &ExactRational {
        let i = self.breakpoints.partition_point(|b| b <= x);
        if i == 0 || i == self.breakpoints.len() {
            &self.tail
        } else {
            &self.values[i - 1]
        }
    }

    /// (overlap length, value) for every constancy run meeting `iv`, tails included.
    pub fn overlaps<'a>(&'a self, iv: &Interval) -> Vec<(ExactRational, &'a ExactRational)> {
        let mut out = Vec::new();
        let (lo, hi) = (iv.lo(), iv.hi());
        let bps = &self.breakpoints;
        if bps.is_empty() {
            out.push((iv.length(), &self.tail));
            return out;
        }
        let first = &bps[0];
        let last = &bps[bps.len() - 1];
        if lo < first {
            let end = ExactRational::min_of(hi, first);
            out.push((end - lo, &self.tail));
        }
        // first piece whose right end exceeds lo
        let start = bps.partition_point(|b| b <= lo).saturating_sub(1);
        for i in start..self.values.len() {
            let (a, b) = (&bps[i], &bps[i + 1]);
            if a >= hi {
                break;
            }
            let s = ExactRational::max_of(a, lo);
            let e = ExactRational::min_of(b, hi);
            if s < e {
                out.push((e - s, &self.values[i]));
            }
        }
        if hi > last {
            let s = ExactRational::max_of(lo, last);
            out.push((hi - s, &self.tail));
        }
        out
    }

    pub fn integrate(&self, iv: &Interval) -> ExactRational {
        self.overlaps(iv).into_iter().map(|(len, v)| len * v).sum()
    }

    pub fn integrate_power(&self, iv: &Interval, r: u32) -> ExactRational {
        self.overlaps(iv).into_iter().map(|(len, v)| len * v.pow(r as i32)).sum()
    }

    pub fn mean(&self, iv: &Interval) -> ExactRational {
        self.integrate(iv) / iv.length()
    }

    pub fn min_piece_length(&self) -> Option<ExactRational> {
        self.breakpoints.windows(2).map(|w| &w[1] - &w[0]).min()
    }

    /// (min, max) over all values including the tail.
    pub fn value_range(&self) -> (ExactRational, ExactRational) {
        let mut lo = self.tail.clone();
        let mut hi = self.tail.clone();
        for v in &self.values {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        (lo, hi)
    }

    /// Largest ratio between values of neighbouring constancy runs, tails included.
    pub fn max_adjacent_ratio(&self) -> ExactRational {
        let mut seq: Vec<&ExactRational> = Vec::with_capacity(self.values.len() + 2);
        seq.push(&self.tail);
        seq.extend(self.values.iter());
        seq.push(&self.tail);
        seq.windows(2)
            .map(|w| if w[0] >= w[1] { w[0] / w[1] } else { w[1] / w[0] })
            .max()
            .unwrap_or_else(ExactRational::one)
    }

    pub fn translate(&self, by: &ExactRational) -> StepDensity {
        StepDensity {
            breakpoints: self.breakpoints.iter().map(|b| b + by).collect(),
            values: self.values.clone(),
            tail: self.tail.clone(),
        }
    }

    /// Image under `x -> 2c - x`.
    pub fn reflect(&self, center: &ExactRational) -> StepDensity {
        let two_c = center * ExactRational::from(2);
        StepDensity {
            breakpoints: self.breakpoints.iter().rev().map(|b| &two_c - b).collect(),
            values: self.values.iter().rev().cloned().collect(),
            tail: self.tail.clone(),
        }
    }

    /// Canonical text form: a `tail` header, then `lo hi value` per piece.
    pub fn to_text(&self) -> String {
        let mut s = format!("tail {}\n", self.tail);
        for (w, v) in self.breakpoints.windows(2).zip(&self.values) {
            let _ = writeln!(s, "{} {} {}", w[0], w[1], v);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tail = None;
        let mut pieces = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: no + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<ExactRational>().map_err(|e| perr(e.to_string()));
            match fields.as_slice() {
                ["tail", v] if tail.is_none() => tail = Some(num(v)?),
                [lo, hi, v] if tail.is_some() => {
                    let iv = Interval::new(num(lo)?, num(hi)?).map_err(|e| perr(e.to_string()))?;
                    pieces.push((iv, num(v)?));
                }
                _ => return Err(perr(format!("unexpected line {line:?}"))),
            }
        }
        let tail = tail.ok_or(Error::Parse { line: 0, msg: "missing tail header".into() })?;
        Self::from_pieces(pieces, tail)
    }
}

impl Measure for StepDensity {
    fn measure(&self, i: &Interval) -> Result<ExactRational> {
        Ok(self.integrate(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn halves() -> StepDensity {
        StepDensity::new(vec![q(0, 1), q(1, 2), q(1, 1)], vec![q(2, 3), q(4, 3)], q(1, 1)).unwrap()
    }

    fn iv(a: ExactRational, b: ExactRational) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn lebesgue_integral() {
        assert_eq!(StepDensity::lebesgue().integrate(&iv(q(1, 4), q(3, 4))), q(1, 2));
        assert_eq!(StepDensity::lebesgue().integrate_power(&iv(q(1, 4), q(3, 4)), 5), q(1, 2));
    }

    #[test]
    fn split_conserves_mass() {
        let f = halves();
        assert_eq!(f.integrate(&iv(q(0, 1), q(1, 1))), q(1, 1));
        assert_eq!(f.integrate_power(&iv(q(0, 1), q(1, 1)), 2), q(10, 9));
        assert_eq!(f.integrate_power(&iv(q(0, 1), q(1, 1)), 1), q(1, 1));
    }

    #[test]
    fn straddles_tails() {
        let f = halves();
        // 1·1 + 2/3·1/2 + 4/3·1/2 + 1·1
        assert_eq!(f.integrate(&iv(q(-1, 1), q(2, 1))), q(3, 1));
        assert_eq!(f.integrate(&iv(q(1, 4), q(3, 4))), q(1, 2));
        assert_eq!(f.integrate(&iv(q(5, 4), q(3, 2))), q(1, 4));
    }

    #[test]
    fn lookup() {
        let f = halves();
        assert_eq!(*f.value_at(&q(-1, 1)), q(1, 1));
        assert_eq!(*f.value_at(&q(0, 1)), q(2, 3));
        assert_eq!(*f.value_at(&q(1, 2)), q(4, 3));
        assert_eq!(*f.value_at(&q(1, 1)), q(1, 1));
        assert_eq!(f.max_adjacent_ratio(), q(2, 1));
    }

    #[test]
    fn text_round_trip() {
        let f = halves();
        let t = f.to_text();
        assert_eq!(t, "tail 1/1\n0/1 1/2 2/3\n1/2 1/1 4/3\n");
        assert_eq!(StepDensity::from_text(&t).unwrap(), f);
        assert!(StepDensity::from_text("0 1 1\n").is_err());
        assert!(StepDensity::from_text("tail 1\n0 1/2 1\n1/3 1 1\n").is_err());
    }

    #[test]
    fn validation() {
        assert!(StepDensity::new(vec![q(0, 1), q(1, 1)], vec![q(0, 1)], q(1, 1)).is_err());
        assert!(StepDensity::new(vec![q(1, 1), q(0, 1)], vec![q(1, 1)], q(1, 1)).is_err());
        assert!(StepDensity::new(vec![q(0, 1)], vec![], q(1, 1)).is_err());
    }

    #[test]
    fn reflection_mirrors_values() {
        let f = halves().reflect(&q(1, 2));
        assert_eq!(f.values(), &[q(4, 3), q(2, 3)]);
        assert_eq!(f.breakpoints(), &[q(0, 1), q(1, 2), q(1, 1)]);
    }
}
