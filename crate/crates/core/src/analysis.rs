//! Exact n-adic doubling constants, non-doubling certificates and the
//! covering bound that turns uniform n-adic doubling into doubling.

use std::collections::BTreeSet;

use dashu::integer::IBig;
use rayon::prelude::*;
use serde::Serialize;

use crate::construction::{pair_at, ReweightParams, StageSchedule};
use crate::density::{Measure, StepDensity};
use crate::error::{Error, Result};
use crate::interval::{Interval, NAdicInterval};
use crate::rational::ExactRational;

/// Which grid levels to examine. Levels are those of the parent interval
/// whose children are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Depth {
    /// From the coarsest level that can matter down to the stabilization depth.
    Auto,
    /// Levels `0..=p` only (the unit interval and its descendants).
    Max(i32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Justification {
    /// The density is constant; every ratio is 1.
    Constant,
    /// Coarser levels are dominated by the first enumerated one and deeper
    /// levels cannot exceed the enumerated maximum: the constant is exact.
    Exact,
    /// Deeper levels are only bounded by `deep_bound`, which exceeds the
    /// enumerated maximum.
    DeepBounded,
    /// Only the requested levels were examined.
    Truncated,
    /// Coarse levels outside the unit interval were not examined.
    CoarseUnchecked,
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthCertificate {
    pub start_level: i32,
    pub stable_level: i32,
    pub deep_bound: ExactRational,
    pub justification: Justification,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoublingReport {
    pub base: u32,
    pub constant: ExactRational,
    /// `(J1, J2)` siblings with `mu(J1)/mu(J2) = constant`.
    pub witness: Option<(NAdicInterval, NAdicInterval)>,
    pub depth: DepthCertificate,
}

impl DoublingReport {
    /// Certified upper bound over every level.
    pub fn bound(&self) -> ExactRational {
        match self.depth.justification {
            Justification::Truncated => self.constant.clone(),
            _ => ExactRational::max_of(&self.constant, &self.depth.deep_bound).clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizationDepth {
    pub level: i32,
    /// Largest value ratio across a breakpoint that deeper levels can still see.
    pub deep_ratio: ExactRational,
}

fn nadic_len(n: u32, p: i32) -> ExactRational {
    ExactRational::int_pow(n as u64, -(p as i64))
}

/// Smallest `p` with `n^-p < len`.
fn first_level_below(n: u32, len: &ExactRational) -> i32 {
    let mut p = (-len.log2_approx() / (n as f64).log2()).floor() as i32;
    while nadic_len(n, p - 1) < *len {
        p -= 1;
    }
    while nadic_len(n, p) >= *len {
        p += 1;
    }
    p
}

fn is_resolved(x: &ExactRational, n: u32, level: i32) -> bool {
    (x * ExactRational::int_pow(n as u64, level as i64)).is_integer()
}

/// Value on each side of every breakpoint, tails included.
fn jump_ratios(f: &StepDensity) -> Vec<(ExactRational, ExactRational)> {
    let mut seq: Vec<&ExactRational> = vec![f.tail()];
    seq.extend(f.values());
    seq.push(f.tail());
    f.breakpoints()
        .iter()
        .zip(seq.windows(2))
        .map(|(x, w)| (x.clone(), if w[0] >= w[1] { w[0] / w[1] } else { w[1] / w[0] }))
        .collect()
}

fn deep_ratio(f: &StepDensity, n: u32, level: i32) -> ExactRational {
    jump_ratios(f)
        .into_iter()
        .filter(|(x, _)| !is_resolved(x, n, level))
        .map(|(_, r)| r)
        .max()
        .unwrap_or_else(ExactRational::one)
}

/// Level beyond which any parent interval holds at most one breakpoint, plus
/// two guard levels, together with the largest ratio deeper levels can reach.
pub fn stabilization_depth(f: &StepDensity, n: u32) -> Result<StabilizationDepth> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("base must be at least 2, got {n}")));
    }
    let min_len = f
        .min_piece_length()
        .ok_or_else(|| Error::InvalidDensity("stabilization depth needs at least one breakpoint".into()))?;
    let level = first_level_below(n, &min_len) + 2;
    Ok(StabilizationDepth { level, deep_ratio: deep_ratio(f, n, level) })
}

/// Finest level whose intervals can hold each one-signed cluster of
/// breakpoints, minus one: parents there are the coarsest worth visiting.
pub(crate) fn coarse_start(f: &StepDensity, n: u32) -> i32 {
    clusters(f)
        .iter()
        .map(|(c0, c1)| {
            let fits = |q: i32| NAdicInterval::containing(n, q, c0).unwrap().hi() >= *c1;
            let mut q = first_level_below(n, &(c1 - c0)) - 1;
            while !fits(q) {
                q -= 1;
            }
            while fits(q + 1) {
                q += 1;
            }
            q - 1
        })
        .min()
        .unwrap()
}

/// Hulls of the breakpoints on each side of 0; no n-adic interval straddles 0.
pub(crate) fn clusters(f: &StepDensity) -> Vec<(ExactRational, ExactRational)> {
    let bps = f.breakpoints();
    let (first, last) = (&bps[0], &bps[bps.len() - 1]);
    let zero = ExactRational::zero();
    let mut clusters = Vec::new();
    if *first < zero {
        clusters.push((first.clone(), ExactRational::min_of(last, &zero).clone()));
    }
    if *last > zero {
        clusters.push((ExactRational::max_of(first, &zero).clone(), last.clone()));
    }
    clusters
}

/// Parent intervals at `level` holding a breakpoint strictly inside.
pub(crate) fn active_parents(f: &StepDensity, n: u32, level: i32) -> Vec<NAdicInterval> {
    let mut idx: BTreeSet<IBig> = BTreeSet::new();
    for x in f.breakpoints() {
        let j = NAdicInterval::containing(n, level, x).unwrap();
        if j.lo() != *x {
            idx.insert(j.index().clone());
        }
    }
    idx.into_iter().map(|k| NAdicInterval::new(n, level, k).unwrap()).collect()
}

/// Best sibling ratio in one family: `(ratio, argmax, argmin)`.
pub(crate) fn family_ratio(f: &StepDensity, parent: &NAdicInterval) -> (ExactRational, NAdicInterval, NAdicInterval) {
    let kids = parent.children();
    let masses: Vec<ExactRational> = kids.iter().map(|c| f.integrate(&c.to_interval())).collect();
    let (mut hi, mut lo) = (0, 0);
    for i in 1..masses.len() {
        if masses[i] > masses[hi] {
            hi = i;
        }
        if masses[i] < masses[lo] {
            lo = i;
        }
    }
    (&masses[hi] / &masses[lo], kids[hi].clone(), kids[lo].clone())
}

pub(crate) type Best<W> = Option<(ExactRational, W)>;

/// Keeps the first strictly larger candidate, so ties resolve to the
/// smallest `(level, index)` when candidates arrive in that order.
pub(crate) fn merge<W>(best: &mut Best<W>, cand: Best<W>) {
    if let Some((r, w)) = cand {
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            *best = Some((r, w));
        }
    }
}

pub(crate) fn level_range(f: &StepDensity, n: u32, depth: Depth) -> Result<(i32, i32, ExactRational, Justification)> {
    match depth {
        Depth::Max(p) => {
            if p < 0 {
                return Err(Error::InvalidParameter(format!("depth must be non-negative, got {p}")));
            }
            Ok((0, p, ExactRational::one(), Justification::Truncated))
        }
        Depth::Auto => {
            let st = stabilization_depth(f, n)?;
            let start = coarse_start(f, n).min(st.level);
            Ok((start, st.level, st.deep_ratio, Justification::Exact))
        }
    }
}

/// Exact supremum of sibling mass ratios for base `n`.
pub fn nadic_doubling_constant(f: &StepDensity, n: u32, depth: Depth) -> Result<DoublingReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("base must be at least 2, got {n}")));
    }
    if f.is_constant() {
        let cert = DepthCertificate {
            start_level: 0,
            stable_level: 0,
            deep_bound: ExactRational::one(),
            justification: Justification::Constant,
        };
        return Ok(DoublingReport { base: n, constant: ExactRational::one(), witness: None, depth: cert });
    }
    let (start, end, deep, mut just) = level_range(f, n, depth)?;
    let per_level: Vec<Best<(NAdicInterval, NAdicInterval)>> = (start..=end)
        .into_par_iter()
        .map(|p| {
            let mut best = None;
            for parent in active_parents(f, n, p) {
                let (r, j1, j2) = family_ratio(f, &parent);
                if r > ExactRational::one() {
                    merge(&mut best, Some((r, (j1, j2))));
                }
            }
            best
        })
        .collect();
    let mut best = None;
    for b in per_level {
        merge(&mut best, b);
    }
    let (constant, witness) = match best {
        Some((r, w)) => (r, Some(w)),
        None => (ExactRational::one(), None),
    };
    if just == Justification::Exact && deep > constant {
        just = Justification::DeepBounded;
    }
    let cert = DepthCertificate { start_level: start, stable_level: end, deep_bound: deep, justification: just };
    Ok(DoublingReport { base: n, constant, witness, depth: cert })
}

/// Exact `mu(G)/mu(H)` for abutting intervals of equal length.
pub fn adjacent_pair_ratio<M: Measure + ?Sized>(m: &M, g: &Interval, h: &Interval) -> Result<ExactRational> {
    if !g.is_adjacent(h) || g.length() != h.length() {
        return Err(Error::NotAdjacent(format!("{g} and {h}")));
    }
    Ok(m.measure(g)? / m.measure(h)?)
}

/// Where a stage sits: its centre, its own `Z` and its depth.
#[derive(Clone, Debug, Serialize)]
pub struct Anchor {
    pub center: ExactRational,
    pub scale: ExactRational,
    pub alpha: u32,
}

impl Anchor {
    pub fn of_stage(p: &ReweightParams) -> Self {
        Anchor { center: p.z(), scale: p.z(), alpha: p.alpha() }
    }

    /// Anchors of a ray composition, stage `eta` shifted by `eta - 1`.
    pub fn of_ray(stages: &[ReweightParams]) -> Vec<Self> {
        stages
            .iter()
            .enumerate()
            .map(|(i, p)| Anchor { center: p.z() + ExactRational::from(i as u64), scale: p.z(), alpha: p.alpha() })
            .collect()
    }

    pub fn of_schedule(s: &StageSchedule) -> Vec<Self> {
        s.stages.iter().map(|st| Anchor::of_stage(&st.params)).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertifiedPair {
    pub h: Interval,
    pub g: Interval,
    pub ratio: ExactRational,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonDoublingCertificate {
    pub pairs: Vec<CertifiedPair>,
    pub strictly_increasing: bool,
}

/// The extreme pair of every stage, in stage order, with exact ratios.
pub fn non_doubling_certificate(f: &StepDensity, anchors: &[Anchor]) -> Result<NonDoublingCertificate> {
    let pairs = anchors
        .iter()
        .map(|a| {
            let (h, g) = pair_at(&a.center, &a.scale, a.alpha);
            let ratio = adjacent_pair_ratio(f, &h, &g)?;
            Ok(CertifiedPair { h, g, ratio })
        })
        .collect::<Result<Vec<_>>>()?;
    let strictly_increasing = pairs.windows(2).all(|w| w[1].ratio > w[0].ratio);
    Ok(NonDoublingCertificate { pairs, strictly_increasing })
}

/// `M·z/(z-2)` with `z = floor(n·|I1|)`: how far apart two equal intervals
/// of `[0,1)` can be in mass for a measure that is n-adic doubling with
/// constant `M`.
pub fn covering_bound(i1: &Interval, i2: &Interval, n: u32, m: &ExactRational) -> Result<ExactRational> {
    let unit = Interval::new(ExactRational::zero(), ExactRational::one()).unwrap();
    if !unit.contains_interval(i1) || !unit.contains_interval(i2) {
        return Err(Error::CoveringPrecondition("intervals must lie in [0,1)".into()));
    }
    if i1.length() != i2.length() {
        return Err(Error::CoveringPrecondition("intervals must have equal length".into()));
    }
    let scaled = i1.length() * ExactRational::from(n);
    let z = scaled.floor();
    if scaled <= ExactRational::from(2) || z <= IBig::from(2) {
        return Err(Error::CoveringPrecondition(format!("n·|I1| = {scaled} leaves no interior children")));
    }
    let z = ExactRational::from(z);
    Ok(m * &z / (z - ExactRational::from(2)))
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub i1: Interval,
    pub i2: Interval,
    pub ratio: ExactRational,
    pub bound: ExactRational,
    pub best_base: u32,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformCheckReport {
    pub m: ExactRational,
    /// `(n, certified n-adic constant bound)`.
    pub constants: Vec<(u32, ExactRational)>,
    pub precondition_holds: bool,
    pub pairs: Vec<PairCheck>,
    pub tightest_bound: Option<ExactRational>,
    pub all_hold: bool,
}

/// Confirms `mu(I2)/mu(I1)` against the best covering bound over `n_list`.
pub fn uniform_doubling_check(
    f: &StepDensity,
    m: &ExactRational,
    n_list: &[u32],
    pairs: &[(Interval, Interval)],
) -> Result<UniformCheckReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("base list is empty".into()));
    }
    let constants = n_list
        .iter()
        .map(|&n| Ok((n, nadic_doubling_constant(f, n, Depth::Auto)?.bound())))
        .collect::<Result<Vec<_>>>()?;
    let precondition_holds = constants.iter().all(|(_, c)| c <= m);
    let mut checks = Vec::with_capacity(pairs.len());
    for (i1, i2) in pairs {
        if !i1.is_adjacent(i2) {
            return Err(Error::NotAdjacent(format!("{i1} and {i2}")));
        }
        let mut best: Option<(ExactRational, u32)> = None;
        let mut last_err = None;
        for &n in n_list {
            match covering_bound(i1, i2, n, m) {
                Ok(b) => {
                    if best.as_ref().is_none_or(|(c, _)| b < *c) {
                        best = Some((b, n));
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
        let (bound, best_base) = match best {
            Some(b) => b,
            None => return Err(last_err.unwrap()),
        };
        let ratio = f.integrate(i2) / f.integrate(i1);
        let holds = ratio <= bound;
        checks.push(PairCheck { i1: i1.clone(), i2: i2.clone(), ratio, bound, best_base, holds });
    }
    let tightest_bound = checks.iter().map(|c| c.bound.clone()).min();
    let all_hold = checks.iter().all(|c| c.holds);
    Ok(UniformCheckReport { m: m.clone(), constants, precondition_holds, pairs: checks, tightest_bound, all_hold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{extreme_pair, motivating_measure, reweight, MotivatingKind};
    use crate::rational::q;

    fn iv(a: ExactRational, b: ExactRational) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn constant_density() {
        let r = nadic_doubling_constant(&StepDensity::lebesgue(), 7, Depth::Auto).unwrap();
        assert_eq!(r.constant, q(1, 1));
        assert!(stabilization_depth(&StepDensity::lebesgue(), 3).is_err());
    }

    #[test]
    fn dyadic_constant_of_a_stage_is_kappa() {
        let p = ReweightParams::new(q(2, 3), 2, 10).unwrap();
        let r = nadic_doubling_constant(&reweight(&p), 2, Depth::Auto).unwrap();
        assert_eq!(r.constant, q(2, 1));
        assert_eq!(r.depth.justification, Justification::Exact);
        let (j1, j2) = r.witness.unwrap();
        assert_eq!(j1.parent(), j2.parent());
    }

    #[test]
    fn stabilization_level_formula() {
        // pieces of length Z/2^10 with Z = 2^-4: p = ceil(log3(2^14)) + 2
        let f = StepDensity::new(vec![q(0, 1), q(1, 1 << 14), q(1, 1)], vec![q(2, 1), q(1, 2)], q(1, 1)).unwrap();
        let st = stabilization_depth(&f, 3).unwrap();
        assert_eq!(st.level, ((14.0 * 2f64.ln()) / 3f64.ln()).ceil() as i32 + 2);
    }

    #[test]
    fn alpha_one_deep_ratio_below_kappa_squared() {
        let p = ReweightParams::new(q(2, 3), 1, 6).unwrap();
        let st = stabilization_depth(&reweight(&p), 3).unwrap();
        assert!(st.deep_ratio <= q(4, 1));
    }

    #[test]
    fn adjacent_pairs() {
        let lin = motivating_measure(MotivatingKind::Linear, 0).unwrap();
        for j in 1..=5 {
            let t = ExactRational::pow2(-j);
            let r = adjacent_pair_ratio(&lin, &iv(-&t, q(0, 1)), &iv(q(0, 1), t.clone())).unwrap();
            assert_eq!(r, q(2, 1) / t);
        }
        let f = StepDensity::lebesgue();
        assert!(adjacent_pair_ratio(&f, &iv(q(0, 1), q(1, 2)), &iv(q(3, 4), q(5, 4))).is_err());
        let p = ReweightParams::new(q(2, 3), 3, 5).unwrap();
        let e = extreme_pair(&p);
        assert_eq!(adjacent_pair_ratio(&reweight(&p), &e.h, &e.g).unwrap(), q(8, 1));
    }

    #[test]
    fn covering() {
        let i1 = iv(q(0, 1), q(1, 10));
        let i2 = iv(q(1, 10), q(1, 5));
        assert_eq!(covering_bound(&i1, &i2, 1000, &q(2, 1)).unwrap(), q(100, 49));
        assert!(covering_bound(&i1, &i2, 20, &q(2, 1)).is_err());
        assert!(covering_bound(&i1, &i2, 25, &q(2, 1)).is_err());
        assert_eq!(covering_bound(&i1, &i2, 30, &q(1, 1)).unwrap(), q(3, 1));
    }

    #[test]
    fn uniform_check_on_lebesgue() {
        let pairs = vec![(iv(q(0, 1), q(1, 4)), iv(q(1, 4), q(1, 2)))];
        let r = uniform_doubling_check(&StepDensity::lebesgue(), &q(1, 1), &[100, 1000], &pairs).unwrap();
        assert!(r.precondition_holds && r.all_hold);
        assert_eq!(r.pairs[0].ratio, q(1, 1));
        assert_eq!(r.tightest_bound, Some(q(250, 248)));
    }
}
