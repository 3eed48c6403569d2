//! Reverse Hölder and Muckenhoupt constants of step densities, on arbitrary
//! and on n-adic intervals. Everything is compared on r-th powers so that
//! every check stays a rational inequality.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    active_parents, clusters, coarse_start, merge, nadic_doubling_constant, stabilization_depth, Best,
    DepthCertificate, Depth, Justification,
};
use crate::construction::{pair_at, reweight, ReweightParams, StageSchedule};
use crate::density::StepDensity;
use crate::enclosure::{root_enclosure, Enclosure};
use crate::error::{Error, Result};
use crate::interval::{Interval, NAdicInterval};
use crate::rational::ExactRational;

#[derive(Clone, Debug, Serialize)]
pub struct RHConstant {
    pub interval: Interval,
    pub r: u32,
    /// Mean of `f^r` over the interval.
    pub value_r_power: ExactRational,
    /// Mean of `f` over the interval.
    pub value_mean: ExactRational,
    pub constant_rth_power: ExactRational,
}

fn check_r(r: u32, min: u32) -> Result<()> {
    if r < min {
        return Err(Error::InvalidParameter(format!("exponent r must be at least {min}, got {r}")));
    }
    Ok(())
}

/// `C(I)^r = mean(f^r) / mean(f)^r`.
pub(crate) fn rh_ratio(f: &StepDensity, iv: &Interval, r: u32) -> ExactRational {
    f.integrate_power(iv, r) * iv.length().pow(r as i32 - 1) / f.integrate(iv).pow(r as i32)
}

pub fn rh_constant(f: &StepDensity, iv: &Interval, r: u32) -> Result<RHConstant> {
    check_r(r, 1)?;
    let len = iv.length();
    let value_r_power = f.integrate_power(iv, r) / &len;
    let value_mean = f.integrate(iv) / &len;
    let constant_rth_power = &value_r_power / value_mean.pow(r as i32);
    Ok(RHConstant { interval: iv.clone(), r, value_r_power, value_mean, constant_rth_power })
}

#[derive(Clone, Debug, Serialize)]
pub struct ArConstant {
    pub interval: Interval,
    pub r: u32,
    pub value: Enclosure,
    pub exact: bool,
}

/// `mean(w) · mean(w^(-1/(r-1)))^(r-1)`, exact when every piece value met by
/// the interval is a perfect `(r-1)`-th power and enclosed otherwise.
pub fn ar_constant(f: &StepDensity, iv: &Interval, r: u32, bits: u32) -> Result<ArConstant> {
    check_r(r, 2)?;
    let len = iv.length();
    let mean = f.integrate(iv) / &len;
    let (mut lo, mut hi) = (ExactRational::zero(), ExactRational::zero());
    for (w, v) in f.overlaps(iv) {
        let root = root_enclosure(v, r - 1, bits);
        let weight = w / &len;
        lo += &weight / &root.hi;
        hi += &weight / &root.lo;
    }
    let e = (r - 1) as i32;
    let value = Enclosure { lo: &mean * lo.pow(e), hi: &mean * hi.pow(e) };
    let exact = value.is_exact();
    Ok(ArConstant { interval: iv.clone(), r, value, exact })
}

#[derive(Clone, Debug, Serialize)]
pub struct SubdivisionReport {
    pub parts: usize,
    pub whole_rth_power: ExactRational,
    pub max_part_rth_power: ExactRational,
    pub max_length_ratio: ExactRational,
    /// `m · max C(I_n)^r · max(|I|/|I_n|)^(r-1)`.
    pub general_bound: ExactRational,
    pub general_holds: bool,
    pub equal_averages: bool,
    /// `C(I)^r <= max C(I_n)^r`, checked only when all averages agree.
    pub equal_average_holds: Option<bool>,
}

fn check_tiling(iv: &Interval, parts: &[Interval]) -> Result<Vec<Interval>> {
    let mut sorted = parts.to_vec();
    sorted.sort_by(|a, b| a.lo().cmp(b.lo()));
    let Some(first) = sorted.first() else {
        return Err(Error::NotTiling("empty partition".into()));
    };
    if first.lo() != iv.lo() || sorted.last().unwrap().hi() != iv.hi() {
        return Err(Error::NotTiling(format!("partition does not span {iv}")));
    }
    if let Some(w) = sorted.windows(2).find(|w| w[0].hi() != w[1].lo()) {
        return Err(Error::NotTiling(format!("{} and {} do not abut", w[0], w[1])));
    }
    Ok(sorted)
}

/// Both subdivision inequalities for `I` split into `parts`.
pub fn subdivision_bound_check(f: &StepDensity, iv: &Interval, parts: &[Interval], r: u32) -> Result<SubdivisionReport> {
    check_r(r, 1)?;
    let parts = check_tiling(iv, parts)?;
    let whole = rh_ratio(f, iv, r);
    let len = iv.length();
    let max_part = parts.iter().map(|p| rh_ratio(f, p, r)).max().unwrap();
    let max_length_ratio = parts.iter().map(|p| &len / p.length()).max().unwrap();
    let m = ExactRational::from(parts.len());
    let general_bound = &m * &max_part * max_length_ratio.pow(r as i32 - 1);
    let mean = f.integrate(iv) / &len;
    let equal_averages = parts.iter().all(|p| f.integrate(p) / p.length() == mean);
    Ok(SubdivisionReport {
        parts: parts.len(),
        general_holds: whole <= general_bound,
        equal_average_holds: equal_averages.then(|| whole <= max_part),
        whole_rth_power: whole,
        max_part_rth_power: max_part,
        max_length_ratio,
        general_bound,
        equal_averages,
    })
}

/// `b^r < 2`: the geometric series behind the uniform n-adic bound converges.
pub fn rh_series_condition(b: &ExactRational, r: u32) -> bool {
    b.pow(r as i32) < ExactRational::from(2)
}

/// Upper bound on `C(J)^r` for every n-adic `J` of a single stage:
/// `max((1.001·b^r·kappa^r/(2-b^r) + 1) / (0.99·a)^r, kappa^(2r))`.
/// `None` when `b^r >= 2`.
pub fn uniform_rh_constant_bound(p: &ReweightParams, r: u32) -> Option<ExactRational> {
    if !rh_series_condition(p.b(), r) {
        return None;
    }
    let ri = r as i32;
    let br = p.b().pow(ri);
    let kr = p.kappa().pow(ri);
    let series = ExactRational::new(1001, 1000) * &br * &kr / (ExactRational::from(2) - &br) + ExactRational::one();
    let first = series / (ExactRational::new(99, 100) * p.a()).pow(ri);
    Some(ExactRational::max_of(&first, &kr.pow(2)).clone())
}

#[derive(Clone, Debug, Serialize)]
pub struct NadicRhReport {
    pub base: u32,
    pub r: u32,
    pub constant_rth_power: ExactRational,
    pub witness: Option<NAdicInterval>,
    pub depth: DepthCertificate,
    /// Certified n-adic doubling bound, computed first as a precondition.
    pub doubling_bound: ExactRational,
    /// `Some(false)` when `b^r >= 2` and the uniform boundedness argument
    /// does not apply; `None` when no `b` was supplied.
    pub boundedness_applies: Option<bool>,
}

impl NadicRhReport {
    pub fn bound(&self) -> ExactRational {
        match self.depth.justification {
            Justification::Truncated | Justification::CoarseUnchecked => self.constant_rth_power.clone(),
            _ => ExactRational::max_of(&self.constant_rth_power, &self.depth.deep_bound).clone(),
        }
    }
}

/// Supremum of `C(J)^r` over n-adic `J`.
///
/// Coarse levels are skipped only when each breakpoint cluster carries no
/// excess mass over the tail: then `C(J)^r = 1 + E/(t^r·|J|)` decreases as
/// `J` grows past the cluster.
pub fn nadic_rh_constant(
    f: &StepDensity,
    n: u32,
    r: u32,
    depth: Depth,
    b: Option<&ExactRational>,
) -> Result<NadicRhReport> {
    check_r(r, 1)?;
    let doubling = nadic_doubling_constant(f, n, depth)?;
    let boundedness_applies = b.map(|b| rh_series_condition(b, r));
    if f.is_constant() || r == 1 {
        return Ok(NadicRhReport {
            base: n,
            r,
            constant_rth_power: ExactRational::one(),
            witness: None,
            depth: doubling.depth.clone(),
            doubling_bound: doubling.bound(),
            boundedness_applies,
        });
    }
    let (start, end, deep, mut just) = match depth {
        Depth::Max(p) => (0, p, ExactRational::one(), Justification::Truncated),
        Depth::Auto => {
            let st = stabilization_depth(f, n)?;
            let t = f.tail();
            let balanced = clusters(f)
                .iter()
                .all(|(c0, c1)| f.integrate(&Interval::new(c0.clone(), c1.clone()).unwrap()) == t * (c1 - c0));
            let just = if balanced { Justification::Exact } else { Justification::CoarseUnchecked };
            (coarse_start(f, n).min(st.level), st.level, st.deep_ratio.pow(r as i32 - 1), just)
        }
    };
    let per_level: Vec<Best<NAdicInterval>> = (start..=end)
        .into_par_iter()
        .map(|p| {
            let mut best = None;
            for j in active_parents(f, n, p) {
                let c = rh_ratio(f, &j.to_interval(), r);
                if c > ExactRational::one() {
                    merge(&mut best, Some((c, j)));
                }
            }
            best
        })
        .collect();
    let mut best = None;
    for b in per_level {
        merge(&mut best, b);
    }
    let (constant_rth_power, witness) = match best {
        Some((c, j)) => (c, Some(j)),
        None => (ExactRational::one(), None),
    };
    if just == Justification::Exact && deep > constant_rth_power {
        just = Justification::DeepBounded;
    }
    Ok(NadicRhReport {
        base: n,
        r,
        constant_rth_power,
        witness,
        depth: DepthCertificate { start_level: start, stable_level: end, deep_bound: deep, justification: just },
        doubling_bound: doubling.bound(),
        boundedness_applies,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RhGrowth {
    /// `(interval, C^r)` per stage: the interval spans the stage's extreme pair.
    pub values: Vec<(Interval, ExactRational)>,
    pub strictly_increasing: bool,
}

/// `C(H ∪ G)^r` for each stage's extreme pair `H, G`.
pub fn overall_rh_growth(stages: &[ReweightParams], r: u32) -> Result<RhGrowth> {
    check_r(r, 1)?;
    let values: Vec<(Interval, ExactRational)> = stages
        .par_iter()
        .map(|p| {
            let (h, g) = pair_at(&p.z(), &p.z(), p.alpha());
            let iv = Interval::new(h.lo().clone(), g.hi().clone()).unwrap();
            let c = rh_ratio(&reweight(p), &iv, r);
            (iv, c)
        })
        .collect();
    let strictly_increasing = values.windows(2).all(|w| w[1].1 > w[0].1);
    Ok(RhGrowth { values, strictly_increasing })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainDecomposition {
    pub base: u32,
    /// `R^(eta_n) ⊃ L^(eta_n) ⊃ R^(eta_n + 1) ⊃ …`, all of the form `[0, y)`.
    pub chain: Vec<Interval>,
    /// `S_0 = [0,1) \ chain[0]`, then successive differences, then the last link.
    pub segments: Vec<Interval>,
    pub averages: Vec<ExactRational>,
    pub averages_all_one: bool,
    /// `f == 1` on `S_2, S_4, …`.
    pub even_segments_flat: bool,
}

/// Splits `[0,1)` along the descending chain of `R_n`, `L_n` intervals of
/// the stages that serve base `n`.
pub fn chain_decomposition(schedule: &StageSchedule, f: &StepDensity, n: u32) -> Result<ChainDecomposition> {
    let first = schedule
        .first_stage_for(n)
        .ok_or_else(|| Error::InvalidParameter(format!("no stage serves base {n}")))?;
    let mut chain = Vec::new();
    for eta in first..=schedule.stages.len() {
        let (Some(r), Some(l)) = (schedule.r_interval(eta, n), schedule.l_interval(eta, n)) else {
            return Err(Error::InvalidParameter(format!("stage {eta} has no centre for base {n}")));
        };
        chain.push(r);
        chain.push(l);
    }
    let one = ExactRational::one();
    let mut cuts = vec![one.clone()];
    cuts.extend(chain.iter().map(|c| c.hi().clone()));
    if cuts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Separation { stage: first, base: n });
    }
    let mut segments: Vec<Interval> = cuts.windows(2).map(|w| Interval::new(w[1].clone(), w[0].clone()).unwrap()).collect();
    segments.push(chain.last().unwrap().clone());
    let averages: Vec<ExactRational> = segments.iter().map(|s| f.mean(s)).collect();
    let averages_all_one = averages.iter().all(|a| *a == one);
    let even_segments_flat = segments
        .iter()
        .skip(2)
        .step_by(2)
        .all(|s| f.overlaps(s).iter().all(|(_, v)| **v == one));
    Ok(ChainDecomposition { base: n, chain, segments, averages, averages_all_one, even_segments_flat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn unit() -> Interval {
        Interval::new(q(0, 1), q(1, 1)).unwrap()
    }

    fn halves(a: ExactRational, b: ExactRational) -> StepDensity {
        StepDensity::new(vec![q(0, 1), q(1, 2), q(1, 1)], vec![a, b], q(1, 1)).unwrap()
    }

    #[test]
    fn rh_examples() {
        let f = halves(q(2, 3), q(4, 3));
        assert_eq!(rh_constant(&f, &unit(), 2).unwrap().constant_rth_power, q(10, 9));
        assert_eq!(rh_constant(&f, &unit(), 1).unwrap().constant_rth_power, q(1, 1));
        let c = StepDensity::constant(q(5, 2)).unwrap();
        assert_eq!(rh_constant(&c, &unit(), 4).unwrap().constant_rth_power, q(1, 1));
    }

    #[test]
    fn ar_examples() {
        let f = halves(q(2, 3), q(4, 3));
        let a = ar_constant(&f, &unit(), 2, 64).unwrap();
        assert!(a.exact);
        assert_eq!(a.value.lo, q(9, 8));
        let g = halves(q(4, 9), q(16, 9));
        let a3 = ar_constant(&g, &unit(), 3, 64).unwrap();
        assert!(a3.exact);
        assert_eq!(a3.value.lo, q(10, 9) * q(9, 8).pow(2));
        let h = halves(q(1, 2), q(3, 2));
        let enc = ar_constant(&h, &unit(), 3, 64).unwrap();
        assert!(!enc.exact);
        // mean 1 times ((sqrt2 + sqrt(2/3))/2)^2 = 2/3 + sqrt(4/3)/2
        let approx = 2.0 / 3.0 + (4.0f64 / 3.0).sqrt() / 2.0;
        assert!(enc.value.lo < enc.value.hi && enc.value.width() < q(1, 1 << 50));
        assert!((enc.value.midpoint_f64() - approx).abs() < 1e-12);
    }

    #[test]
    fn subdivision_trivial_and_tiling() {
        let f = halves(q(2, 3), q(4, 3));
        let rep = subdivision_bound_check(&f, &unit(), &[unit()], 2).unwrap();
        assert_eq!(rep.whole_rth_power, rep.general_bound);
        assert_eq!(rep.equal_average_holds, Some(true));
        let gap = [Interval::new(q(0, 1), q(1, 3)).unwrap(), Interval::new(q(1, 2), q(1, 1)).unwrap()];
        assert!(matches!(subdivision_bound_check(&f, &unit(), &gap, 2), Err(Error::NotTiling(_))));
    }

    #[test]
    fn nadic_rh_at_level_zero_matches_unit_interval() {
        let f = StepDensity::new(vec![q(0, 1), q(1, 3), q(3, 5), q(1, 1)], vec![q(1, 2), q(3, 1), q(2, 3)], q(1, 1)).unwrap();
        let rep = nadic_rh_constant(&f, 2, 3, Depth::Max(0), None).unwrap();
        assert_eq!(rep.constant_rth_power, rh_constant(&f, &unit(), 3).unwrap().constant_rth_power);
    }

    #[test]
    fn series_condition_flag() {
        let p = ReweightParams::new(q(2, 3), 1, 6).unwrap();
        let f = reweight(&p);
        let ok = nadic_rh_constant(&f, 3, 2, Depth::Auto, Some(p.b())).unwrap();
        assert_eq!(ok.boundedness_applies, Some(true));
        assert!(ok.witness.is_some());
        assert!(ok.bound() <= uniform_rh_constant_bound(&p, 2).unwrap());
        let flagged = nadic_rh_constant(&f, 3, 3, Depth::Auto, Some(p.b())).unwrap();
        assert_eq!(flagged.boundedness_applies, Some(false));
        assert!(uniform_rh_constant_bound(&p, 3).is_none());
    }

    #[test]
    fn growth_over_alpha() {
        let stages: Vec<_> = (1..=3).map(|al| ReweightParams::new(q(2, 3), al, 8).unwrap()).collect();
        let g = overall_rh_growth(&stages, 2).unwrap();
        assert!(g.strictly_increasing);
        let flat: Vec<_> = (0..3).map(|_| stages[1].clone()).collect();
        assert!(!overall_rh_growth(&flat, 2).unwrap().strictly_increasing);
        assert!(overall_rh_growth(&stages[..1], 2).unwrap().values[0].1 >= q(1, 1));
    }
}
