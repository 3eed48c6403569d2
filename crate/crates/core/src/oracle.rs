//! Brute-force reference enumerations over every n-adic interval of `[0,1)`
//! up to a given level. Slow by design; used to cross-check the pruned
//! searches, together with the random inputs they are checked on.

use std::collections::BTreeSet;

use dashu::integer::IBig;
use rand::Rng;

use crate::analysis::{family_ratio, merge, Best};
use crate::density::StepDensity;
use crate::interval::{Interval, NAdicInterval};
use crate::rational::ExactRational;

fn all_at(n: u32, level: i32) -> impl Iterator<Item = NAdicInterval> {
    let count = (n as u64).pow(level as u32);
    (1..=count).map(move |k| NAdicInterval::new(n, level, IBig::from(k)).unwrap())
}

/// Largest sibling ratio among children of every interval at levels `0..=p_max`.
pub fn brute_doubling(f: &StepDensity, n: u32, p_max: i32) -> (ExactRational, Option<(NAdicInterval, NAdicInterval)>) {
    let mut best: Best<(NAdicInterval, NAdicInterval)> = None;
    for p in 0..=p_max {
        for parent in all_at(n, p) {
            let (r, j1, j2) = family_ratio(f, &parent);
            if r > ExactRational::one() {
                merge(&mut best, Some((r, (j1, j2))));
            }
        }
    }
    match best {
        Some((r, w)) => (r, Some(w)),
        None => (ExactRational::one(), None),
    }
}

/// Largest `mean(f^r)/mean(f)^r` over every interval at levels `0..=p_max`.
pub fn brute_rh(f: &StepDensity, n: u32, r: u32, p_max: i32) -> (ExactRational, Option<NAdicInterval>) {
    let mut best: Best<NAdicInterval> = None;
    for p in 0..=p_max {
        for j in all_at(n, p) {
            let iv = j.to_interval();
            let c = f.integrate_power(&iv, r) * iv.length().pow(r as i32 - 1) / f.integrate(&iv).pow(r as i32);
            if c > ExactRational::one() {
                merge(&mut best, Some((c, j)));
            }
        }
    }
    match best {
        Some((c, w)) => (c, Some(w)),
        None => (ExactRational::one(), None),
    }
}


/// A random step density on `[0,1)` with at most `max_pieces` pieces, tail 1,
/// breakpoints with small denominators and values in `[1/8, 8]`.
pub fn random_density<R: Rng>(rng: &mut R, max_pieces: usize) -> StepDensity {
    let pieces = rng.gen_range(1..=max_pieces);
    let mut cuts: BTreeSet<ExactRational> = BTreeSet::new();
    cuts.insert(ExactRational::zero());
    cuts.insert(ExactRational::one());
    while cuts.len() < pieces + 1 {
        let d: i64 = rng.gen_range(2..=40);
        let n: i64 = rng.gen_range(1..d);
        cuts.insert(ExactRational::new(n, d));
    }
    let bps: Vec<ExactRational> = cuts.into_iter().collect();
    let values = (0..pieces).map(|_| random_value(rng)).collect();
    StepDensity::new(bps, values, ExactRational::one()).unwrap()
}

pub fn random_value<R: Rng>(rng: &mut R) -> ExactRational {
    let d: i64 = rng.gen_range(1..=8);
    let n: i64 = rng.gen_range(1..=8 * d);
    let v = ExactRational::new(n, d);
    if v < ExactRational::new(1, 8) {
        ExactRational::new(1, 8)
    } else {
        v
    }
}

/// A random tiling of `iv` into `parts` pieces.
pub fn random_tiling<R: Rng>(rng: &mut R, iv: &Interval, parts: usize) -> Vec<Interval> {
    let len = iv.length();
    let mut cuts: BTreeSet<ExactRational> = BTreeSet::new();
    while cuts.len() < parts - 1 {
        let d: i64 = rng.gen_range(2..=50);
        let n: i64 = rng.gen_range(1..d);
        cuts.insert(iv.lo() + &len * ExactRational::new(n, d));
    }
    let mut pts = vec![iv.lo().clone()];
    pts.extend(cuts);
    pts.push(iv.hi().clone());
    pts.windows(2).map(|w| Interval::new(w[0].clone(), w[1].clone()).unwrap()).collect()
}
