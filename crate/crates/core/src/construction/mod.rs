//! Densities that are n-adic doubling for many bases yet fail to be doubling.

mod motivating;
mod nested;

pub use motivating::{motivating_measure, MotivatingKind, MotivatingMeasure, DEFAULT_DEPTH};
pub use nested::{
    nested_stages, schedule_for_target, slack_factor, stage_bound, growth_bound_upper, ScheduleOptions, Stage,
    StageSchedule,
};

use serde::Serialize;

use crate::density::StepDensity;
use crate::diophantine::find_witness;
use crate::enclosure::{ceil_log2, log2_enclosure, Enclosure};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::ExactRational;

/// Parameters of one re-weighting stage: split weights `a < 1 < b = 2 - a`,
/// depth `alpha`, and centre `Z = 2^-x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReweightParams {
    a: ExactRational,
    b: ExactRational,
    alpha: u32,
    x: u64,
}

impl ReweightParams {
    pub fn new(a: ExactRational, alpha: u32, x: u64) -> Result<Self> {
        if !(a.is_positive() && a < ExactRational::one()) {
            return Err(Error::InvalidParameter(format!("a = {a} must lie in (0,1)")));
        }
        if alpha == 0 {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        if x == 0 {
            return Err(Error::InvalidParameter("Z = 2^-x needs x >= 1".into()));
        }
        let b = ExactRational::from(2) - &a;
        Ok(ReweightParams { a, b, alpha, x })
    }

    /// Parameters with `kappa = (1+t)/(1-t)`, i.e. `a = 1 - t`.
    pub fn from_t(t: &ExactRational, alpha: u32, x: u64) -> Result<Self> {
        Self::new(ExactRational::one() - t, alpha, x)
    }

    pub fn a(&self) -> &ExactRational {
        &self.a
    }

    pub fn b(&self) -> &ExactRational {
        &self.b
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn z(&self) -> ExactRational {
        ExactRational::pow2(-(self.x as i64))
    }

    pub fn kappa(&self) -> ExactRational {
        &self.b / &self.a
    }

    /// `log2(kappa)`, enclosed.
    pub fn gamma(&self, bits: u32) -> Enclosure {
        log2_enclosure(&self.kappa(), bits)
    }

    /// `[Z/2, 3Z/2)`.
    pub fn support(&self) -> Interval {
        let z = self.z();
        Interval::new(&z / ExactRational::from(2), &z * ExactRational::new(3, 2)).unwrap()
    }

    pub fn with_x(&self, x: u64) -> Self {
        ReweightParams { x, ..self.clone() }
    }
}

fn split_pieces(p: &ReweightParams, first: &ExactRational, second: &ExactRational) -> Vec<(Interval, ExactRational)> {
    let z = p.z();
    let two = ExactRational::from(2);
    let steps = 2 * p.alpha;
    let weights = |beta: u32| if beta <= p.alpha { (first, second) } else { (second, first) };

    let mut left = Vec::new();
    let mut cur = &z / &two;
    let mut val = ExactRational::one();
    for beta in 1..=steps {
        let (sl, sr) = weights(beta);
        let mid = (&cur + &z) / &two;
        left.push((Interval::new(cur.clone(), mid.clone()).unwrap(), &val * sl));
        cur = mid;
        val *= sr;
    }
    left.push((Interval::new(cur, z.clone()).unwrap(), val));

    let mut right = Vec::new();
    let mut cur = &z * ExactRational::new(3, 2);
    let mut val = ExactRational::one();
    for beta in 1..=steps {
        let (sl, sr) = weights(beta);
        let mid = (&cur + &z) / &two;
        right.push((Interval::new(mid.clone(), cur.clone()).unwrap(), &val * sr));
        cur = mid;
        val *= sl;
    }
    right.push((Interval::new(z, cur).unwrap(), val));
    right.reverse();

    left.extend(right);
    left
}

/// The single-stage density: `1` outside `[Z/2, 3Z/2)`, and inside the
/// result of `2·alpha` mass-preserving splits converging on `Z` from both
/// sides (`a` left / `b` right for the first `alpha` steps, then reversed).
pub fn reweight(p: &ReweightParams) -> StepDensity {
    StepDensity::from_pieces(split_pieces(p, &p.a, &p.b), ExactRational::one()).unwrap()
}

/// The same procedure with the roles of `a` and `b` exchanged, the variant
/// used for Muckenhoupt constants.
pub fn reweight_swapped(p: &ReweightParams) -> StepDensity {
    StepDensity::from_pieces(split_pieces(p, &p.b, &p.a), ExactRational::one()).unwrap()
}

/// The `4·alpha + 2` constancy intervals of a stage.
#[derive(Clone, Debug, Serialize)]
pub struct NiceDecomposition {
    pub alpha: u32,
    pub pieces: Vec<(Interval, ExactRational)>,
}

impl NiceDecomposition {
    pub fn values(&self) -> Vec<ExactRational> {
        self.pieces.iter().map(|(_, v)| v.clone()).collect()
    }

    /// Ratios of neighbouring values, each oriented as (value nearer `Z`) /
    /// (value farther from `Z`); the entry straddling `Z` itself is `1`.
    pub fn adjacent_ratios(&self) -> Vec<ExactRational> {
        let v = self.values();
        let mid = 2 * self.alpha as usize;
        (0..v.len() - 1)
            .map(|i| if i <= mid { &v[i + 1] / &v[i] } else { &v[i] / &v[i + 1] })
            .collect()
    }

    pub fn max_min_ratio(&self) -> ExactRational {
        let v = self.values();
        let max = v.iter().max().unwrap();
        let min = v.iter().min().unwrap();
        max / min
    }

    pub fn total_mass(&self) -> ExactRational {
        self.pieces.iter().map(|(iv, v)| iv.length() * v).sum()
    }
}

pub fn nice_decomposition(p: &ReweightParams) -> NiceDecomposition {
    NiceDecomposition { alpha: p.alpha, pieces: split_pieces(p, &p.a, &p.b) }
}

/// Two abutting intervals meeting at `Z` whose mass ratio is `kappa^alpha`.
#[derive(Clone, Debug, Serialize)]
pub struct ExtremePair {
    pub h: Interval,
    pub g: Interval,
    pub ratio: ExactRational,
}

/// `H = [Z - Z/2^(alpha+1), Z)` and `G = [Z, Z + Z/2^(alpha+1))`.
///
/// Intervals of length `Z/2^alpha` only reach ratio `kappa^(alpha-1)`; one
/// level finer, both sides sit inside the last two split generations and the
/// ratio is exactly `kappa^alpha`.
pub fn extreme_pair(p: &ReweightParams) -> ExtremePair {
    let f = reweight(p);
    let (h, g) = pair_at(&p.z(), &p.z(), p.alpha);
    let ratio = f.integrate(&h) / f.integrate(&g);
    ExtremePair { h, g, ratio }
}

/// The extreme pair of a stage centred at `center` with scale `z`.
pub fn pair_at(center: &ExactRational, z: &ExactRational, alpha: u32) -> (Interval, Interval) {
    let w = z * ExactRational::pow2(-(alpha as i64 + 1));
    let h = Interval::new(center - &w, center.clone()).unwrap();
    let g = Interval::new(center.clone(), center + &w).unwrap();
    (h, g)
}

/// Places stage `eta` (1-based) into `[eta-1, eta)`.
pub fn compose_ray(stages: &[ReweightParams]) -> Result<StepDensity> {
    let mut pieces: Vec<(Interval, ExactRational)> = Vec::new();
    for (i, p) in stages.iter().enumerate() {
        let shift = ExactRational::from(i as u64);
        let sup = p.support();
        if !(sup.lo().is_positive() && *sup.hi() < ExactRational::one()) {
            return Err(Error::InvalidParameter(format!("stage {} support {sup} is not inside (0,1)", i + 1)));
        }
        let translated: Vec<_> = split_pieces(p, &p.a, &p.b).into_iter().map(|(iv, v)| (iv.translate(&shift), v)).collect();
        append_with_filler(&mut pieces, translated, i + 1)?;
    }
    StepDensity::from_pieces(pieces, ExactRational::one())
}

/// Appends `more` after `pieces`, bridging any gap with value-1 filler.
pub(crate) fn append_with_filler(
    pieces: &mut Vec<(Interval, ExactRational)>,
    more: Vec<(Interval, ExactRational)>,
    stage: usize,
) -> Result<()> {
    if let (Some((last, _)), Some((next, _))) = (pieces.last(), more.first()) {
        if next.lo() < last.hi() {
            return Err(Error::InvalidParameter(format!("stage {stage} overlaps its predecessor")));
        }
        if next.lo() > last.hi() {
            let gap = Interval::new(last.hi().clone(), next.lo().clone()).unwrap();
            pieces.push((gap, ExactRational::one()));
        }
    }
    pieces.extend(more);
    Ok(())
}

/// Ray-composition depths `alpha_eta = max(1, ceil(log2 eta))`, so that
/// `kappa^alpha_eta >= eta^gamma`.
pub fn ray_alphas(stages: usize) -> Vec<u32> {
    (1..=stages as u64).map(|eta| ceil_log2(eta).max(1)).collect()
}

/// Ray stages for a fixed `a`, each centred at the smallest witness for the
/// bases `2..=max(2, eta)`.
pub fn ray_stages(a: &ExactRational, stages: usize, eps: &ExactRational, x_max: u64) -> Result<Vec<ReweightParams>> {
    ray_alphas(stages)
        .into_iter()
        .enumerate()
        .map(|(i, alpha)| {
            let bases: Vec<u32> = (2..=(i as u32 + 1).max(2)).collect();
            let w = find_witness(&bases, eps, x_max)?.ok_or(Error::WitnessNotFound { x_max })?;
            ReweightParams::new(a.clone(), alpha, w.x)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn stage(alpha: u32) -> ReweightParams {
        ReweightParams::new(q(2, 3), alpha, 4).unwrap()
    }

    #[test]
    fn alpha_one_by_hand() {
        let p = stage(1);
        let z = p.z();
        let d = nice_decomposition(&p);
        let (a, b) = (q(2, 3), q(4, 3));
        let left: Vec<_> = d.pieces[..3].to_vec();
        assert_eq!(left[0], (Interval::new(&z / q(2, 1), &z * q(3, 4)).unwrap(), a.clone()));
        assert_eq!(left[1], (Interval::new(&z * q(3, 4), &z * q(7, 8)).unwrap(), &b * &b));
        assert_eq!(left[2], (Interval::new(&z * q(7, 8), z.clone()).unwrap(), &b * &a));
        assert_eq!(d.pieces.len(), 6);
    }

    #[test]
    fn conservation_and_identity_outside() {
        for alpha in 1..=5 {
            let p = stage(alpha);
            let f = reweight(&p);
            assert_eq!(f.integrate(&p.support()), p.z());
            let outside = Interval::new(p.z() * q(3, 2), q(1, 1)).unwrap();
            assert_eq!(f.integrate(&outside), outside.length());
            assert_eq!(nice_decomposition(&p).pieces.len(), 4 * alpha as usize + 2);
        }
    }

    #[test]
    fn extreme_ratio_is_kappa_power() {
        for alpha in 1..=4 {
            let e = extreme_pair(&stage(alpha));
            assert_eq!(e.ratio, q(2, 1).pow(alpha as i32));
            assert_eq!(e.h.length(), e.g.length());
        }
    }

    #[test]
    fn ray_masses() {
        let stages: Vec<_> = (1..=3).map(|a| ReweightParams::new(q(2, 3), a, 3)).collect::<Result<_>>().unwrap();
        let f = compose_ray(&stages).unwrap();
        for eta in 0..3 {
            let iv = Interval::new(q(eta, 1), q(eta + 1, 1)).unwrap();
            assert_eq!(f.integrate(&iv), q(1, 1));
        }
        assert_eq!(ray_alphas(5), vec![1, 1, 2, 2, 3]);
    }

    #[test]
    fn swapped_density_exchanges_roles() {
        let p = stage(2);
        let f = reweight_swapped(&p);
        assert_eq!(f.values()[0], q(4, 3));
        assert_eq!(f.integrate(&p.support()), p.z());
    }
}
