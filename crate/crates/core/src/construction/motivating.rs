//! The two introductory examples: the linear density `f(x) = x` for `x > 0`
//! (and `1` for `x < 0`), and its dyadic staircase version.

use serde::{Deserialize, Serialize};

use crate::density::{Measure, StepDensity};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::ExactRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotivatingKind {
    Linear,
    Staircase,
}

#[derive(Clone, Debug)]
pub enum MotivatingMeasure {
    Linear,
    /// Value `2^-k` on `[2^-k, 2^-k+1)` for `k = 1..=depth`; queries meeting
    /// `(0, 2^-depth)` are refused rather than approximated.
    Staircase { density: StepDensity, depth: u32 },
}

/// Default truncation depth of the staircase.
pub const DEFAULT_DEPTH: u32 = 64;

pub fn motivating_measure(kind: MotivatingKind, depth: u32) -> Result<MotivatingMeasure> {
    match kind {
        MotivatingKind::Linear => Ok(MotivatingMeasure::Linear),
        MotivatingKind::Staircase => {
            if depth == 0 {
                return Err(Error::InvalidParameter("staircase depth must be positive".into()));
            }
            let mut bps = vec![ExactRational::from(-1)];
            let mut vals = vec![ExactRational::one()];
            for k in (1..=depth as i64).rev() {
                bps.push(ExactRational::pow2(-k));
                vals.push(ExactRational::pow2(-k));
            }
            // [-1, 2^-depth) carries the placeholder 1; it is never queried
            // on (0, 2^-depth) and equals the true density on [-1, 0)
            bps.insert(1, ExactRational::zero());
            vals.insert(1, ExactRational::pow2(-(depth as i64)));
            bps.push(ExactRational::one());
            let density = StepDensity::new(bps, vals, ExactRational::one())?;
            Ok(MotivatingMeasure::Staircase { density, depth })
        }
    }
}

fn check_domain(i: &Interval) -> Result<()> {
    if *i.lo() < ExactRational::from(-1) || *i.hi() > ExactRational::one() {
        return Err(Error::InvalidParameter(format!("{i} is not inside [-1, 1)")));
    }
    Ok(())
}

impl Measure for MotivatingMeasure {
    fn measure(&self, i: &Interval) -> Result<ExactRational> {
        check_domain(i)?;
        match self {
            MotivatingMeasure::Linear => {
                let zero = ExactRational::zero();
                let neg = ExactRational::min_of(i.hi(), &zero) - i.lo();
                let neg = if neg.is_positive() { neg } else { zero.clone() };
                let lo = ExactRational::max_of(i.lo(), &zero);
                let pos = if i.hi() > lo { (i.hi().pow(2) - lo.pow(2)) / ExactRational::from(2) } else { zero };
                Ok(neg + pos)
            }
            MotivatingMeasure::Staircase { density, depth } => {
                let cut = ExactRational::pow2(-(*depth as i64));
                if i.hi().is_positive() && *i.lo() < cut {
                    return Err(Error::TruncatedRegion(cut.to_string()));
                }
                Ok(density.integrate(i))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn iv(a: ExactRational, b: ExactRational) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn linear_examples() {
        let m = motivating_measure(MotivatingKind::Linear, 0).unwrap();
        assert_eq!(m.measure(&iv(q(0, 1), q(1, 1))).unwrap(), q(1, 2));
        assert_eq!(m.measure(&iv(q(-1, 2), q(1, 2))).unwrap(), q(5, 8));
        assert!(m.measure(&iv(q(0, 1), q(2, 1))).is_err());
    }

    #[test]
    fn staircase_examples() {
        let m = motivating_measure(MotivatingKind::Staircase, 10).unwrap();
        assert_eq!(m.measure(&iv(q(1, 4), q(1, 2))).unwrap(), q(1, 16));
        assert_eq!(m.measure(&iv(q(-1, 1), q(0, 1))).unwrap(), q(1, 1));
        assert!(matches!(m.measure(&iv(q(0, 1), q(1, 4))), Err(Error::TruncatedRegion(_))));
        assert!(m.measure(&iv(q(1, 2048), q(1, 1024))).is_err());
        assert_eq!(m.measure(&iv(q(1, 1024), q(1, 512))).unwrap(), q(1, 1024 * 1024));
    }
}
