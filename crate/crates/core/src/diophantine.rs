//! Exponents `x` for which `2^-x` is simultaneously close to a power
//! `n^-p` of every base `n` in a finite set.
//!
//! Closeness is always decided by exact integer cross-multiplication. Floats
//! appear only in a prefilter that discards `x` values which provably cannot
//! pass; every survivor is re-checked exactly.

use std::collections::BTreeMap;

use dashu::base::Abs;
use dashu::integer::{IBig, UBig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enclosure::{log2_enclosure, MAX_BITS};
use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// Above this bound the scan switches to stepping between good exponents.
pub const SCAN_LIMIT: u64 = 100_000;

const BLOCK: u64 = 4096;

/// The `p >= 1` minimising `|2^x - n^p|`, ties towards the smaller `p`.
pub fn best_exponent(n: u32, x: u64) -> u64 {
    assert!(n >= 2 && x >= 1, "best_exponent needs n >= 2 and x >= 1");
    if n == 2 {
        return x;
    }
    let target = UBig::ONE << x as usize;
    let nb = UBig::from(n);
    let est = (x as f64 * std::f64::consts::LN_2 / (n as f64).ln()).floor().max(0.0) as u64;
    let mut p = est;
    let mut np = nb.pow(p as usize);
    while np > target {
        p -= 1;
        np /= &nb;
    }
    loop {
        let next = &np * &nb;
        if next > target {
            break;
        }
        np = next;
        p += 1;
    }
    // n^p <= 2^x < n^(p+1)
    if p == 0 {
        return 1;
    }
    let below = &target - &np;
    let above = &np * &nb - &target;
    if above < below {
        p + 1
    } else {
        p
    }
}

/// `|1 - 2^x / n^p|` exactly.
pub fn relative_error(n: u32, x: u64, p: u64) -> ExactRational {
    let np = IBig::from(UBig::from(n).pow(p as usize));
    let two = IBig::from(UBig::ONE << x as usize);
    ExactRational::new((&np - two).abs(), np)
}

/// Exact test of `|n^p - 2^x| < eps · n^p`.
pub fn is_close(n: u32, x: u64, p: u64, eps: &ExactRational) -> bool {
    let np = IBig::from(UBig::from(n).pow(p as usize));
    let two = IBig::from(UBig::ONE << x as usize);
    let diff = (&np - two).abs();
    diff * IBig::from(eps.denom().clone()) < eps.numer() * np
}

/// A certified simultaneous approximation `2^-x ≈ n^-p_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma4Witness {
    pub bases: Vec<u32>,
    pub epsilon: ExactRational,
    pub x: u64,
    pub p: BTreeMap<u32, u64>,
}

impl Lemma4Witness {
    pub fn z(&self) -> ExactRational {
        ExactRational::pow2(-(self.x as i64))
    }

    pub fn y(&self, n: u32) -> Option<ExactRational> {
        self.p.get(&n).map(|&p| ExactRational::int_pow(n as u64, -(p as i64)))
    }

    /// Exact `|1 - 2^x / n^p_n|` per base.
    pub fn errors(&self) -> BTreeMap<u32, ExactRational> {
        self.p.iter().map(|(&n, &p)| (n, relative_error(n, self.x, p))).collect()
    }

    /// Re-derives every exponent and repeats every comparison from scratch.
    pub fn verify(&self) -> bool {
        if self.bases.is_empty() || self.x == 0 {
            return false;
        }
        let keys: Vec<u32> = self.p.keys().copied().collect();
        let mut bases = self.bases.clone();
        bases.sort_unstable();
        bases.dedup();
        if keys != bases {
            return false;
        }
        self.bases.iter().all(|&n| {
            let p = best_exponent(n, self.x);
            self.p[&n] == p && is_close(n, self.x, p, &self.epsilon)
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn validate(bases: &[u32], eps: &ExactRational, x_max: u64) -> Result<Vec<u32>> {
    if bases.is_empty() {
        return Err(Error::InvalidParameter("bases must be non-empty".into()));
    }
    if let Some(n) = bases.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidParameter(format!("base {n} is below 2")));
    }
    if !eps.is_positive() || *eps >= ExactRational::one() {
        return Err(Error::InvalidParameter(format!("epsilon {eps} is not in (0,1)")));
    }
    if x_max < 1 {
        return Err(Error::InvalidParameter("x_max must be at least 1".into()));
    }
    let mut b = bases.to_vec();
    b.sort_unstable();
    b.dedup();
    Ok(b)
}

/// Float-side necessary condition for closeness at a single base.
struct Prefilter {
    theta: f64,
    window: f64,
}

impl Prefilter {
    fn new(n: u32, eps: &ExactRational) -> Self {
        let e = eps.to_f64() * (1.0 + 1e-9);
        // |x ln2 - p ln n| < -ln(1 - eps) is necessary
        let log_window = -(1.0 - e.min(0.999_999_999)).ln();
        let ln_n = (n as f64).ln();
        Prefilter { theta: std::f64::consts::LN_2 / ln_n, window: log_window / ln_n + 1e-9 }
    }

    fn may_pass(&self, x: u64) -> bool {
        let t = x as f64 * self.theta;
        let d = (t - t.round()).abs();
        d < self.window + x as f64 * 4e-16
    }
}

fn exact_witness(bases: &[u32], eps: &ExactRational, x: u64) -> Option<Lemma4Witness> {
    let mut p = BTreeMap::new();
    for &n in bases {
        let e = best_exponent(n, x);
        if !is_close(n, x, e, eps) {
            return None;
        }
        p.insert(n, e);
    }
    Some(Lemma4Witness { bases: bases.to_vec(), epsilon: eps.clone(), x, p })
}

/// Smallest `x <= x_max` that is a witness for every base.
pub fn find_witness(bases: &[u32], eps: &ExactRational, x_max: u64) -> Result<Option<Lemma4Witness>> {
    find_witness_where(bases, eps, 1, x_max, |_| true)
}

/// Smallest `x` in `[x_min, x_max]` that is a witness and satisfies `accept`.
pub fn find_witness_where<F>(
    bases: &[u32],
    eps: &ExactRational,
    x_min: u64,
    x_max: u64,
    accept: F,
) -> Result<Option<Lemma4Witness>>
where
    F: Fn(&Lemma4Witness) -> bool + Sync,
{
    let bases = validate(bases, eps, x_max)?;
    let non2: Vec<u32> = bases.iter().copied().filter(|&n| n != 2).collect();
    let filters: Vec<Prefilter> = non2.iter().map(|&n| Prefilter::new(n, eps)).collect();
    let check = |x: u64| exact_witness(&bases, eps, x).filter(|w| accept(w));

    let scan_end = x_max.min(SCAN_LIMIT.max(x_min));
    let mut start = x_min.max(1);
    while start <= scan_end {
        let end = (start + BLOCK - 1).min(scan_end);
        let survivors: Vec<u64> = (start..=end).filter(|&x| filters.iter().all(|f| f.may_pass(x))).collect();
        if let Some(w) = survivors.par_iter().find_map_first(|&x| check(x)) {
            return Ok(Some(w));
        }
        start = end + 1;
    }
    if x_max <= scan_end {
        return Ok(None);
    }

    // Beyond the plain scan, walk the good exponents of the most restrictive
    // base and test the rest exactly.
    if filters.is_empty() {
        // only base 2: every x is exact
        return Ok((start..=x_max).find_map(check));
    }
    let lead = (0..filters.len()).min_by(|&a, &b| filters[a].window.total_cmp(&filters[b].window)).unwrap();
    let others: Vec<usize> = (0..filters.len()).filter(|&i| i != lead).collect();
    let stepper = GoodSetStepper::new(non2[lead], &filters[lead])?;
    let mut x = match stepper.first_at_or_after(start) {
        Some(x) => x,
        None => return Ok(None),
    };
    while x <= x_max {
        if others.iter().all(|&i| filters[i].may_pass(x)) {
            if let Some(w) = check(x) {
                return Ok(Some(w));
            }
        }
        x = stepper.next_after(x);
    }
    Ok(None)
}

/// Walks `{x : ||x·theta|| < window}` in increasing order using gaps drawn
/// from the denominators of convergents and intermediate fractions of theta.
struct GoodSetStepper<'a> {
    filter: &'a Prefilter,
    gaps: Vec<u64>,
}

impl<'a> GoodSetStepper<'a> {
    fn new(n: u32, filter: &'a Prefilter) -> Result<Self> {
        let limit = ((8.0 / filter.window).ceil() as u64).max(16);
        let conv = convergent_candidates(n, 40)?;
        let mut qs: Vec<u64> = vec![1];
        qs.extend(conv.iter().map(|&(_, q)| q));
        let mut gaps = Vec::new();
        for w in qs.windows(3) {
            let (q0, q1, q2) = (w[0], w[1], w[2]);
            if q1 == 0 {
                continue;
            }
            let a = (q2 - q0) / q1;
            for j in 0..=a {
                gaps.push(q0 + j * q1);
            }
        }
        gaps.extend(qs.iter().copied());
        let base: Vec<u64> = gaps.iter().copied().filter(|&g| g <= limit).collect();
        let mut all = base.clone();
        for (i, &a) in base.iter().enumerate() {
            for &b in &base[i..] {
                if a + b <= 2 * limit {
                    all.push(a + b);
                }
            }
        }
        all.retain(|&g| g > 0);
        all.sort_unstable();
        all.dedup();
        Ok(GoodSetStepper { filter, gaps: all })
    }

    fn first_at_or_after(&self, x: u64) -> Option<u64> {
        (x..x.saturating_add(1 << 32)).find(|&y| self.filter.may_pass(y))
    }

    fn next_after(&self, x: u64) -> u64 {
        for &g in &self.gaps {
            if self.filter.may_pass(x + g) {
                return x + g;
            }
        }
        (x + 1..).find(|&y| self.filter.may_pass(y)).unwrap()
    }
}

/// Continued-fraction convergents `p/x` of `log_n 2`, omitting `0/1`.
///
/// Partial quotients are taken from a rational enclosure of `log_n 2` and an
/// entry is emitted only when both ends of the enclosure agree on it, so
/// every pair is a true convergent.
pub fn convergent_candidates(n: u32, count: usize) -> Result<Vec<(u64, u64)>> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("convergents need n >= 3, got {n}")));
    }
    let mut bits = 64;
    loop {
        let l = log2_enclosure(&ExactRational::from(n), bits);
        if l.is_exact() {
            // n is a power of two: log_n 2 = 1/k, a finite expansion
            let k = u64::try_from(l.lo.floor()).unwrap();
            return Ok(vec![(1, k)].into_iter().take(count).collect());
        }
        let (mut lo, mut hi) = (l.hi.recip(), l.lo.recip());
        let mut out = Vec::new();
        let (mut p1, mut q1, mut p2, mut q2): (u128, u128, u128, u128) = (1, 0, 0, 1);
        let mut certified = true;
        while out.len() < count {
            let a = lo.floor();
            if hi.floor() != a {
                certified = false;
                break;
            }
            let a_u = u128::try_from(a.clone()).unwrap();
            let (p, q) = (a_u * p1 + p2, a_u * q1 + q2);
            if p > u64::MAX as u128 || q > u64::MAX as u128 {
                return Ok(out);
            }
            (p2, q2, p1, q1) = (p1, q1, p, q);
            if p != 0 {
                out.push((p as u64, q as u64));
            }
            let af = ExactRational::from(a);
            let (rl, rh) = (&lo - &af, &hi - &af);
            if rl.is_zero() {
                certified = rh.is_zero();
                break;
            }
            (lo, hi) = (rh.recip(), rl.recip());
        }
        if certified || out.len() >= count {
            return Ok(out);
        }
        if bits >= MAX_BITS {
            return Ok(out);
        }
        bits = (bits * 2).min(MAX_BITS);
    }
}
