//! Several re-weighting stages nested towards 0 inside `[0,1)`.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{append_with_filler, split_pieces, ReweightParams};
use crate::density::StepDensity;
use crate::diophantine::{find_witness_where, Lemma4Witness};
use crate::enclosure::{ceil_log2, pow_enclosure, DEFAULT_BITS};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::ExactRational;

/// One stage: its parameters, the largest base it is tuned for, and the
/// witness certifying its centre.
#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub params: ReweightParams,
    pub max_base: u32,
    pub witness: Lemma4Witness,
}

impl Stage {
    fn y(&self, n: u32) -> Option<ExactRational> {
        if n == 2 {
            return Some(self.params.z());
        }
        self.witness.y(n)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageSchedule {
    pub stages: Vec<Stage>,
    pub target: BTreeMap<u32, ExactRational>,
    pub epsilon: ExactRational,
}

impl StageSchedule {
    /// `[0, Y_n/n)` for stage `eta` (1-based).
    pub fn l_interval(&self, eta: usize, n: u32) -> Option<Interval> {
        let y = self.stages.get(eta.checked_sub(1)?)?.y(n)?;
        Interval::new(ExactRational::zero(), y / ExactRational::from(n)).ok()
    }

    /// `[0, n·Y_n)` for stage `eta` (1-based).
    pub fn r_interval(&self, eta: usize, n: u32) -> Option<Interval> {
        let y = self.stages.get(eta.checked_sub(1)?)?.y(n)?;
        Interval::new(ExactRational::zero(), y * ExactRational::from(n)).ok()
    }

    /// First stage whose base range covers `n`.
    pub fn first_stage_for(&self, n: u32) -> Option<usize> {
        self.stages.iter().position(|s| s.max_base >= n).map(|i| i + 1)
    }

    /// Structural checks: increasing `M`, and witnesses matching their stages.
    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::InvalidParameter("schedule has no stages".into()));
        }
        for (i, s) in self.stages.iter().enumerate() {
            let expect: Vec<u32> = (2..=s.max_base).collect();
            let mut got = s.witness.bases.clone();
            got.sort_unstable();
            if got != expect || s.witness.x != s.params.x() || !s.witness.verify() {
                return Err(Error::InvalidParameter(format!("stage {} witness does not certify its centre", i + 1)));
            }
            if i > 0 && s.max_base <= self.stages[i - 1].max_base {
                return Err(Error::InvalidParameter(format!("M must increase strictly at stage {}", i + 1)));
            }
        }
        Ok(())
    }

    /// First `(eta, n)` with `R_n^(eta+1)` not strictly inside `L_n^(eta)`.
    pub fn first_separation_violation(&self) -> Option<(usize, u32)> {
        for eta in 1..self.stages.len() {
            for n in 2..=self.stages[eta - 1].max_base {
                let (Some(l), Some(r)) = (self.l_interval(eta, n), self.r_interval(eta + 1, n)) else {
                    return Some((eta, n));
                };
                if r.hi() >= l.hi() {
                    return Some((eta, n));
                }
            }
        }
        None
    }

    /// `kappa_eta^alpha_eta` per stage.
    pub fn stage_ratios(&self) -> Vec<ExactRational> {
        self.stages.iter().map(|s| s.params.kappa().pow(s.params.alpha() as i32)).collect()
    }

    /// Lower bound on the overall doubling constant.
    pub fn overall_lower_bound(&self) -> ExactRational {
        self.stage_ratios().into_iter().max().unwrap_or_else(ExactRational::one)
    }

    /// True when the stage ratios fail to increase strictly.
    pub fn growth_stalled(&self) -> bool {
        self.stage_ratios().windows(2).any(|w| w[1] <= w[0])
    }

    /// Largest per-stage bound for base `n`.
    pub fn predicted_bound(&self, n: u32) -> ExactRational {
        self.stages
            .iter()
            .map(|s| stage_bound(&s.params, s.max_base, &self.epsilon, n))
            .max()
            .unwrap_or_else(ExactRational::one)
    }
}

/// `1 + delta(eps)`: with `rho = eps·(3 + b^(alpha+1)) / (1 - eps)` the
/// slack is `((1+rho)/(1-rho))^2`. `None` when `rho >= 1`.
pub fn slack_factor(eps: &ExactRational, p: &ReweightParams) -> Option<ExactRational> {
    let one = ExactRational::one();
    let rho = eps * (ExactRational::from(3) + p.b().pow(p.alpha() as i32 + 1)) / (&one - eps);
    if rho >= one {
        return None;
    }
    Some(((&one + &rho) / (&one - &rho)).pow(2))
}

/// Certified rational upper bound on `(1+delta)·kappa^3·(2n)^log2(kappa)`.
pub fn growth_bound_upper(p: &ReweightParams, eps: &ExactRational, n: u32) -> Option<ExactRational> {
    let slack = slack_factor(eps, p)?;
    let k = p.kappa();
    let pow = pow_enclosure(&ExactRational::from(2 * n), &p.gamma(DEFAULT_BITS), DEFAULT_BITS);
    Some(slack * k.pow(3) * pow.hi)
}

/// The bound a single stage is designed to respect at base `n`: `kappa`
/// for `n = 2`, the smaller of `kappa^(alpha+1)` and the growth bound for
/// bases the witness covers, and `kappa^(alpha+1)` (the value spread) beyond.
pub fn stage_bound(p: &ReweightParams, max_base: u32, eps: &ExactRational, n: u32) -> ExactRational {
    let k = p.kappa();
    let spread = k.pow(p.alpha() as i32 + 1);
    if n == 2 {
        return k;
    }
    if n <= max_base {
        if let Some(t) = growth_bound_upper(p, eps, n) {
            return ExactRational::min_of(&t, &spread).clone();
        }
    }
    spread
}

#[derive(Clone, Debug)]
pub struct ScheduleOptions {
    pub epsilon: ExactRational,
    pub x_min: u64,
    pub x_max: u64,
    /// `t = k / grid` is searched on this grid, `kappa = (1+t)/(1-t)`.
    pub grid: u32,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        ScheduleOptions { epsilon: ExactRational::new(1, 1000), x_min: 3, x_max: 100_000, grid: 1000 }
    }
}

fn check_target(target: &BTreeMap<u32, ExactRational>) -> Result<()> {
    if target.is_empty() {
        return Err(Error::Infeasible("target table is empty".into()));
    }
    let floor = ExactRational::new(101, 100);
    for (&n, v) in target {
        if n < 2 {
            return Err(Error::Infeasible(format!("target has base {n} < 2")));
        }
        if *v <= floor {
            return Err(Error::Infeasible(format!("target f({n}) = {v} is not above 101/100")));
        }
    }
    let vals: Vec<&ExactRational> = target.values().collect();
    if vals.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Infeasible("target table must be strictly increasing".into()));
    }
    Ok(())
}

/// Chooses `alpha_eta = 4 + ceil(log2 eta)`, `M_eta = eta + 1`, the largest
/// grid value of `kappa_eta` for which every stage bound stays below the
/// target, and the smallest separated witness for each centre.
pub fn schedule_for_target(
    target: &BTreeMap<u32, ExactRational>,
    stages: usize,
    opts: &ScheduleOptions,
) -> Result<StageSchedule> {
    check_target(target)?;
    if stages == 0 {
        return Err(Error::InvalidParameter("need at least one stage".into()));
    }
    let eps = &opts.epsilon;
    let mut built: Vec<Stage> = Vec::new();
    for eta in 1..=stages {
        let alpha = 4 + ceil_log2(eta as u64);
        let max_base = eta as u32 + 1;
        let fits = |k: u32| -> bool {
            let p = ReweightParams::from_t(&ExactRational::new(k, opts.grid), alpha, 1).unwrap();
            target.iter().all(|(&n, f)| stage_bound(&p, max_base, eps, n) <= *f)
        };
        // bounds grow with t, so the feasible set is an initial segment
        let (mut lo, mut hi) = (0u32, opts.grid);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo == 0 {
            return Err(Error::Infeasible(format!("no kappa on the 1/{} grid fits stage {eta}", opts.grid)));
        }
        let t = ExactRational::new(lo, opts.grid);

        let bases: Vec<u32> = (2..=max_base).collect();
        let prev = built.last();
        let x_from = prev.map_or(opts.x_min, |s| s.params.x() + 1).max(opts.x_min);
        let accept = |w: &Lemma4Witness| separated(prev, w, max_base);
        let w = find_witness_where(&bases, eps, x_from, opts.x_max, accept)?
            .ok_or(Error::Infeasible(format!("no separated witness for stage {eta} with x <= {}", opts.x_max)))?;
        let params = ReweightParams::from_t(&t, alpha, w.x)?;
        built.push(Stage { params, max_base, witness: w });
    }
    let sched = StageSchedule { stages: built, target: target.clone(), epsilon: eps.clone() };
    debug_assert!(sched.first_separation_violation().is_none());
    Ok(sched)
}

/// Whether a candidate centre sits far enough below the previous stage:
/// `R_n` of the new stage inside `L_n` of the old for shared bases, and
/// every new `R_n` below the old stage's support and inside `[0,1)`.
fn separated(prev: Option<&Stage>, w: &Lemma4Witness, max_base: u32) -> bool {
    let y = |n: u32| if n == 2 { w.z() } else { w.y(n).unwrap() };
    for n in 2..=max_base {
        let r_hi = y(n) * ExactRational::from(n);
        if r_hi >= ExactRational::one() {
            return false;
        }
        if let Some(p) = prev {
            if r_hi > p.params.support().lo().clone() {
                return false;
            }
            if n <= p.max_base {
                let l_hi = p.y(n).unwrap() / ExactRational::from(n);
                if r_hi >= l_hi {
                    return false;
                }
            }
        }
    }
    true
}

/// Superposes the stages of a separated schedule into one density on `[0,1)`.
pub fn nested_stages(schedule: &StageSchedule) -> Result<StepDensity> {
    if let Some((stage, base)) = schedule.first_separation_violation() {
        return Err(Error::Separation { stage, base });
    }
    schedule.validate()?;
    let mut pieces = Vec::new();
    // innermost (smallest Z) first, so pieces come out left to right
    for (i, s) in schedule.stages.iter().enumerate().rev() {
        let p = &s.params;
        append_with_filler(&mut pieces, split_pieces(p, p.a(), p.b()), i + 1)?;
    }
    StepDensity::from_pieces(pieces, ExactRational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::reweight;
    use crate::rational::q;

    fn linear_target() -> BTreeMap<u32, ExactRational> {
        (2..=8).map(|n| (n, q(n as i64, 1))).collect()
    }

    #[test]
    fn rejects_bad_targets() {
        let flat: BTreeMap<u32, ExactRational> = (2..=5).map(|n| (n, q(3, 1))).collect();
        assert!(matches!(schedule_for_target(&flat, 2, &ScheduleOptions::default()), Err(Error::Infeasible(_))));
        let low: BTreeMap<u32, ExactRational> = [(2, q(1, 1)), (3, q(2, 1))].into();
        assert!(schedule_for_target(&low, 1, &ScheduleOptions::default()).is_err());
    }

    #[test]
    fn single_stage_schedule_is_a_plain_stage() {
        let s = schedule_for_target(&linear_target(), 1, &ScheduleOptions::default()).unwrap();
        let f = nested_stages(&s).unwrap();
        assert_eq!(f, reweight(&s.stages[0].params));
    }

    #[test]
    fn two_stage_schedule_is_separated_and_conservative() {
        let s = schedule_for_target(&linear_target(), 2, &ScheduleOptions::default()).unwrap();
        assert!(s.first_separation_violation().is_none());
        let f = nested_stages(&s).unwrap();
        let unit = Interval::new(q(0, 1), q(1, 1)).unwrap();
        assert_eq!(f.integrate(&unit), q(1, 1));
        for st in &s.stages {
            let sup = st.params.support();
            let own = reweight(&st.params);
            for (iv, v) in own.pieces() {
                assert!(sup.contains_interval(&iv));
                assert_eq!(f.value_at(iv.lo()), &v);
            }
        }
    }

    #[test]
    fn tampered_schedule_reports_first_violation() {
        let mut s = schedule_for_target(&linear_target(), 2, &ScheduleOptions::default()).unwrap();
        // move stage 2 on top of stage 1
        s.stages[1].params = s.stages[1].params.with_x(s.stages[0].params.x());
        s.stages[1].witness.x = s.stages[0].params.x();
        s.stages[1].witness.p = [(2, s.stages[0].params.x())].into();
        assert!(matches!(nested_stages(&s), Err(Error::Separation { stage: 1, base: 2 })));
    }
}
