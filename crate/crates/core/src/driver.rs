//! Experiment runner: validates a configuration, computes everything, then
//! writes the report files in one go.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    covering_bound, nadic_doubling_constant, non_doubling_certificate, Anchor, Depth, DoublingReport,
};
use crate::config::{ExperimentConfig, Mode, StageConfig};
use crate::construction::{
    compose_ray, extreme_pair, motivating_measure, nested_stages, nice_decomposition, ray_alphas, reweight,
    reweight_swapped, schedule_for_target, slack_factor, stage_bound, growth_bound_upper, MotivatingKind,
    MotivatingMeasure, ReweightParams, ScheduleOptions, DEFAULT_DEPTH,
};
use crate::density::{Measure, StepDensity};
use crate::diophantine::{best_exponent, convergent_candidates, find_witness, Lemma4Witness};
use crate::enclosure::DEFAULT_BITS;
use crate::error::{Error, Result};
use crate::interval::{Interval, NAdicInterval};
use crate::oracle::{brute_doubling, brute_rh, random_density};
use crate::rational::ExactRational;
use crate::report::{Check, Report, Status};
use crate::weights::{
    ar_constant, chain_decomposition, nadic_rh_constant, overall_rh_growth, subdivision_bound_check,
    uniform_rh_constant_bound, NadicRhReport,
};

fn one() -> ExactRational {
    ExactRational::one()
}

fn iv(lo: ExactRational, hi: ExactRational) -> Interval {
    Interval::new(lo, hi).expect("ordered endpoints")
}

/// Witness for an explicit centre: exponents re-derived, closeness checked.
fn witness_at(bases: &[u32], eps: &ExactRational, x: u64) -> Lemma4Witness {
    let mut b = bases.to_vec();
    b.sort_unstable();
    b.dedup();
    let p = b.iter().map(|&n| (n, best_exponent(n, x))).collect();
    Lemma4Witness { bases: b, epsilon: eps.clone(), x, p }
}

struct BuiltStage {
    params: ReweightParams,
    witness: Lemma4Witness,
    epsilon: ExactRational,
}

fn build_stage(cfg: &ExperimentConfig, st: &StageConfig, bases: &[u32]) -> Result<BuiltStage> {
    let eps = st.epsilon.clone().unwrap_or_else(|| cfg.epsilon());
    let witness = match st.x {
        Some(x) => witness_at(bases, &eps, x),
        None => {
            let x_max = st.x_max.unwrap_or_else(|| cfg.x_max());
            find_witness(bases, &eps, x_max)?.ok_or(Error::WitnessNotFound { x_max })?
        }
    };
    let params = ReweightParams::new(st.a.clone(), st.alpha, witness.x)?;
    Ok(BuiltStage { params, witness, epsilon: eps })
}

fn load_density(path: &Path) -> Result<StepDensity> {
    StepDensity::from_text(&std::fs::read_to_string(path)?)
}

#[derive(Serialize)]
struct StageSummary<'a> {
    a: &'a ExactRational,
    b: &'a ExactRational,
    alpha: u32,
    x: u64,
    z: ExactRational,
    kappa: ExactRational,
    epsilon: &'a ExactRational,
    /// `delta(eps)`; the fixed reference slack is `reference_slack - 1`.
    delta: Option<ExactRational>,
    reference_slack: ExactRational,
    witness_errors: BTreeMap<u32, ExactRational>,
}

fn stage_summary(s: &BuiltStage) -> StageSummary<'_> {
    let p = &s.params;
    StageSummary {
        a: p.a(),
        b: p.b(),
        alpha: p.alpha(),
        x: p.x(),
        z: p.z(),
        kappa: p.kappa(),
        epsilon: &s.epsilon,
        delta: slack_factor(&s.epsilon, p).map(|f| f - one()),
        reference_slack: ExactRational::new(101, 100),
        witness_errors: s.witness.errors(),
    }
}

/// Structural checks on one stage density: conservation, tiling, mirror
/// symmetry, identity outside the support, extreme-pair ratio.
fn stage_structure_checks(rep: &mut Report, s: &BuiltStage, f: &StepDensity, tag: &str) {
    let p = &s.params;
    let support = p.support();
    rep.check(Check::eq(&format!("conservation{tag}: mass of [Z/2,3Z/2) equals Z"), f.integrate(&support), p.z()));

    let outside_flat = *f.tail() == one()
        && f.pieces().iter().all(|(piece, v)| *v == one() || support.contains_interval(piece));
    rep.check(Check::holds(&format!("identity outside support{tag}"), outside_flat, ""));

    let nice = nice_decomposition(p);
    let tiles = nice.pieces.first().map(|(i, _)| i.lo()) == Some(support.lo())
        && nice.pieces.last().map(|(i, _)| i.hi()) == Some(support.hi())
        && nice.pieces.windows(2).all(|w| w[0].0.hi() == w[1].0.lo());
    rep.check(Check::holds(
        &format!("partition exactness{tag}: {} constancy intervals tile the support", nice.pieces.len()),
        tiles && nice.pieces.len() == 4 * p.alpha() as usize + 2,
        "",
    ));
    let agrees = nice.pieces.iter().all(|(i, v)| f.integrate(i) == i.length() * v);
    rep.check(Check::holds(&format!("constancy intervals match the density{tag}"), agrees, ""));

    let half = 2 * p.alpha() as usize + 1;
    let vals = nice.values();
    let swapped = reweight_swapped(p);
    let mut mirrored: Vec<ExactRational> = swapped.values()[..half].to_vec();
    mirrored.reverse();
    rep.check(Check::holds(&format!("mirror symmetry{tag}"), vals[half..] == mirrored[..], ""));

    let e = extreme_pair(p);
    rep.check(
        Check::eq(&format!("extreme pair ratio equals kappa^alpha{tag}"), e.ratio.clone(), p.kappa().pow(p.alpha() as i32))
            .with_witness(&e),
    );
}

fn doubling_reports(f: &StepDensity, bases: &[u32], depth: Depth) -> Result<Vec<DoublingReport>> {
    bases.par_iter().map(|&n| nadic_doubling_constant(f, n, depth)).collect()
}

fn rh_reports(f: &StepDensity, bases: &[u32], rs: &[u32], depth: Depth, b: Option<&ExactRational>) -> Result<Vec<NadicRhReport>> {
    let jobs: Vec<(u32, u32)> = rs.iter().flat_map(|&r| bases.iter().map(move |&n| (r, n))).collect();
    jobs.par_iter().map(|&(r, n)| nadic_rh_constant(f, n, r, depth, b)).collect()
}

fn rh_checks(rep: &mut Report, reports: &[NadicRhReport], p: Option<&ReweightParams>, tag: &str) {
    for r in reports {
        let name = format!("RH boundedness{tag} r={} n={}", r.r, r.base);
        let bound = p.and_then(|p| uniform_rh_constant_bound(p, r.r));
        match (r.boundedness_applies, bound) {
            (Some(true), Some(ub)) => rep.check(Check::le(&name, r.bound(), ub).with_witness(&r.witness)),
            (Some(false), _) => rep.check(Check::not_applicable(&name, "b^r >= 2: the geometric series diverges")),
            _ => rep.check(Check::not_applicable(&name, "no stage parameters for this density")),
        }
    }
}

fn single_stage(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let bases = cfg.bases();
    let depth = cfg.depth.to_depth();
    let s = build_stage(cfg, &cfg.stage[0], &bases)?;
    let p = &s.params;
    let f = match &cfg.density {
        Some(path) => load_density(path)?,
        None => reweight(p),
    };
    rep.put("stage", &stage_summary(&s))?;
    rep.put("witness", &s.witness)?;
    rep.check(Check::holds("centre is an epsilon-witness for every base", s.witness.verify(), ""));
    stage_structure_checks(rep, &s, &f, "");

    let reports = doubling_reports(&f, &bases, depth)?;
    for d in &reports {
        let name = format!("n-adic doubling bound n={}", d.base);
        match growth_bound_upper(p, &s.epsilon, d.base) {
            Some(ub) => {
                rep.check(Check::le(&name, d.bound(), ub.clone()).with_witness(&d.witness));
                rep.point("bound", ExactRational::from(d.base), ub);
            }
            None => rep.check(Check::not_applicable(&name, "epsilon too large for the slack estimate")),
        }
        rep.constant("doubling", Some(1), Some(d.base), None, d.constant.clone());
        rep.point("C(n)", ExactRational::from(d.base), d.constant.clone());
    }
    rep.put("doubling", &reports)?;

    let rh = rh_reports(&f, &bases, &cfg.r, depth, Some(p.b()))?;
    rh_checks(rep, &rh, Some(p), "");
    for r in &rh {
        rep.constant("rh_rth_power", Some(1), Some(r.base), Some(r.r), r.constant_rth_power.clone());
    }
    rep.put("rh", &rh)?;
    Ok(())
}

fn ray(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let built: Vec<BuiltStage> = if cfg.stage.is_empty() {
        let a = cfg.a.clone().unwrap();
        ray_alphas(cfg.stages.unwrap())
            .into_iter()
            .enumerate()
            .map(|(i, alpha)| {
                let st = StageConfig { a: a.clone(), alpha, epsilon: None, x: None, x_max: None };
                build_stage(cfg, &st, &ray_bases(i + 1))
            })
            .collect::<Result<_>>()?
    } else {
        cfg.stage.iter().enumerate().map(|(i, st)| build_stage(cfg, st, &ray_bases(i + 1))).collect::<Result<_>>()?
    };
    let params: Vec<ReweightParams> = built.iter().map(|s| s.params.clone()).collect();
    let f = compose_ray(&params)?;
    rep.put("stages", &built.iter().map(stage_summary).collect::<Vec<_>>())?;
    for (i, s) in built.iter().enumerate() {
        let eta = ExactRational::from(i as u64);
        rep.check(Check::eq(&format!("conservation: mass of [{i}, {}) equals 1", i + 1), f.integrate(&iv(eta.clone(), &eta + one())), one()));
        rep.check(Check::holds(&format!("stage {} centre is an epsilon-witness", i + 1), s.witness.verify(), ""));
    }
    let cert = non_doubling_certificate(&f, &Anchor::of_ray(&params))?;
    for (i, (c, p)) in cert.pairs.iter().zip(&params).enumerate() {
        rep.check(Check::eq(&format!("stage {} pair ratio equals kappa^alpha", i + 1), c.ratio.clone(), p.kappa().pow(p.alpha() as i32)));
        rep.constant("pair_ratio", Some(i + 1), None, None, c.ratio.clone());
        rep.point("pair ratio", ExactRational::from(i as u64 + 1), c.ratio.clone());
    }
    // rounding alpha up makes the ratios a staircase, so growth is checked
    // as ratio >= eta on [eta-1, eta) rather than strict increase
    for (i, c) in cert.pairs.iter().enumerate() {
        rep.check(Check::le(&format!("stage {} pair ratio reaches eta", i + 1), ExactRational::from(i as u64 + 1), c.ratio.clone()));
    }
    if cert.pairs.len() > 1 {
        let monotone = cert.pairs.windows(2).all(|w| w[0].ratio <= w[1].ratio);
        rep.check(Check::holds("non-doubling ratios never decrease", monotone, ""));
    }
    rep.put("certificate", &cert)?;

    let bases = cfg.bases();
    let reports = doubling_reports(&f, &bases, cfg.depth.to_depth())?;
    for d in &reports {
        let ub = built
            .iter()
            .enumerate()
            .map(|(i, s)| stage_bound(&s.params, (i as u32 + 1).max(2), &s.epsilon, d.base))
            .max()
            .unwrap();
        rep.check(Check::le(&format!("n-adic doubling bound n={}", d.base), d.bound(), ub).with_witness(&d.witness));
        rep.constant("doubling", None, Some(d.base), None, d.constant.clone());
        rep.point("C(n)", ExactRational::from(d.base), d.constant.clone());
    }
    rep.put("doubling", &reports)?;
    Ok(())
}

/// Stage `eta` of a ray is certified for bases `2..=max(2, eta)`.
fn ray_bases(eta: usize) -> Vec<u32> {
    (2..=(eta as u32).max(2)).collect()
}

fn nested(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let target = cfg.target_table()?;
    let opts = ScheduleOptions { epsilon: cfg.epsilon(), x_max: cfg.x_max(), ..ScheduleOptions::default() };
    let schedule = match schedule_for_target(&target, cfg.stages.unwrap(), &opts) {
        Ok(s) => s,
        Err(Error::Infeasible(msg)) => {
            rep.check(Check::holds("target table admits a schedule", false, msg));
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    rep.put("schedule", &schedule)?;
    let violation = schedule.first_separation_violation();
    rep.check(
        Check::holds("separation: R_n of each stage lies strictly inside L_n of the previous", violation.is_none(), "")
            .with_witness(&violation),
    );
    let f = nested_stages(&schedule)?;
    rep.check(Check::eq("conservation: mass of [0,1) equals 1", f.integrate(&iv(ExactRational::zero(), one())), one()));
    for (i, st) in schedule.stages.iter().enumerate() {
        let p = &st.params;
        let own = reweight(p);
        let same = own.pieces().iter().all(|(i, v)| f.integrate(i) == i.length() * v);
        rep.check(Check::holds(&format!("stage {} restriction equals its own re-weighting", i + 1), same, ""));
    }
    let cert = non_doubling_certificate(&f, &Anchor::of_schedule(&schedule))?;
    for (i, c) in cert.pairs.iter().enumerate() {
        rep.constant("pair_ratio", Some(i + 1), None, None, c.ratio.clone());
        rep.point("pair ratio", ExactRational::from(i as u64 + 1), c.ratio.clone());
    }
    if cert.pairs.len() > 1 {
        rep.check(Check::holds("non-doubling ratios strictly increase", cert.strictly_increasing, ""));
    }
    rep.check(Check::holds("non-doubling growth does not stall", !schedule.growth_stalled(), ""));
    rep.put("certificate", &cert)?;

    let bases: Vec<u32> = target.keys().copied().collect();
    let reports = doubling_reports(&f, &bases, cfg.depth.to_depth())?;
    for d in &reports {
        let fn_ = target[&d.base].clone();
        rep.check(Check::le(&format!("n-adic doubling below target n={}", d.base), d.bound(), fn_.clone()).with_witness(&d.witness));
        rep.check(Check::le(&format!("predicted bound below target n={}", d.base), schedule.predicted_bound(d.base), fn_.clone()));
        rep.constant("doubling", None, Some(d.base), None, d.constant.clone());
        rep.point("C(n)", ExactRational::from(d.base), d.constant.clone());
        rep.point("target", ExactRational::from(d.base), fn_);
    }
    rep.put("doubling", &reports)?;
    let chains = bases
        .iter()
        .filter(|&&n| schedule.first_stage_for(n).is_some())
        .map(|&n| chain_decomposition(&schedule, &f, n))
        .collect::<Result<Vec<_>>>()?;
    for c in &chains {
        rep.check(Check::holds(&format!("chain segments average 1, n={}", c.base), c.averages_all_one, ""));
        rep.check(Check::holds(&format!("f is 1 on even chain segments, n={}", c.base), c.even_segments_flat, ""));
    }
    rep.put("chains", &chains)?;
    Ok(())
}

fn motivating(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let kind = cfg.kind.unwrap_or(MotivatingKind::Linear);
    let n_max = cfg.n_max.unwrap_or(10);
    let k_max = cfg.k_max.unwrap_or(3);
    let m = motivating_measure(kind, cfg.staircase_depth.unwrap_or(DEFAULT_DEPTH))?;
    let mut rows = Vec::new();
    for n in 2..=n_max {
        for k in 1..=k_max as i64 {
            let len = ExactRational::int_pow(n as u64, -k);
            let j1 = iv(&len * ExactRational::from(n - 1), &len * ExactRational::from(n));
            let j2 = iv(ExactRational::zero(), len.clone());
            let name = format!("sibling ratio n={n} k={k}");
            match (m.measure(&j1), m.measure(&j2)) {
                (Ok(a), Ok(b)) => {
                    let ratio = a / b;
                    if kind == MotivatingKind::Linear {
                        rep.check(Check::eq(&name, ratio.clone(), ExactRational::from(2 * n - 1)));
                    }
                    if k == 1 {
                        rep.constant("C(n)", None, Some(n), None, ratio.clone());
                        rep.point("C(n)", ExactRational::from(n), ratio.clone());
                    }
                    rows.push((n, k, Some(ratio)));
                }
                (Err(Error::TruncatedRegion(msg)), _) | (_, Err(Error::TruncatedRegion(msg))) => {
                    rep.check(Check::not_applicable(&name, msg));
                    rows.push((n, k, None));
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
    }
    rep.put("sibling_ratios", &rows)?;
    match &m {
        MotivatingMeasure::Linear => {
            for j in 1..=20 {
                let t = ExactRational::pow2(-j);
                let g = iv(-&t, ExactRational::zero());
                let h = iv(ExactRational::zero(), t.clone());
                let ratio = m.measure(&g)? / m.measure(&h)?;
                rep.check(Check::eq(&format!("adjacent ratio across 0, t=2^-{j}"), ratio.clone(), ExactRational::from(2) / &t));
                rep.point("adjacent ratio", t, ratio);
            }
        }
        MotivatingMeasure::Staircase { depth, .. } => {
            for k in 1..=(*depth as i64).min(20) {
                let step = iv(ExactRational::pow2(-k), ExactRational::pow2(1 - k));
                rep.check(Check::eq(&format!("staircase step mass k={k}"), m.measure(&step)?, ExactRational::pow2(-2 * k)));
            }
        }
    }
    Ok(())
}

fn lemma4(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let bases = cfg.bases();
    let eps = cfg.epsilon();
    let x_max = cfg.x_max();
    let w = find_witness(&bases, &eps, x_max)?;
    let convergents: BTreeMap<u32, Vec<(u64, u64)>> = bases
        .iter()
        .filter(|&&n| n >= 3)
        .map(|&n| Ok((n, convergent_candidates(n, 8)?)))
        .collect::<Result<_>>()?;
    rep.put("convergents", &convergents)?;
    match w {
        Some(w) => {
            rep.check(Check::holds("witness found", true, format!("x = {}", w.x)).with_witness(&w));
            for (n, e) in w.errors() {
                rep.check(Check::lt(&format!("relative error below epsilon n={n}"), e.clone(), eps.clone()));
                rep.constant("relative_error", None, Some(n), None, e);
            }
            rep.check(Check::holds("witness re-verifies from scratch", w.verify(), ""));
            rep.put("witness", &w)?;
        }
        None => rep.check(Check::holds("witness found", false, format!("no x <= {x_max} for epsilon {eps}"))),
    }
    Ok(())
}

fn weights(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let bases = cfg.bases();
    let depth = cfg.depth.to_depth();
    if let Some(path) = &cfg.density {
        let f = load_density(path)?;
        let rh = rh_reports(&f, &bases, &cfg.r, depth, None)?;
        rh_checks(rep, &rh, None, "");
        for r in &rh {
            rep.constant("rh_rth_power", None, Some(r.base), Some(r.r), r.constant_rth_power.clone());
        }
        rep.put("rh", &rh)?;
        return Ok(());
    }
    let built: Vec<BuiltStage> = cfg.stage.iter().map(|st| build_stage(cfg, st, &bases)).collect::<Result<_>>()?;
    rep.put("stages", &built.iter().map(stage_summary).collect::<Vec<_>>())?;
    let mut all_rh = Vec::new();
    for (i, s) in built.iter().enumerate() {
        let tag = format!(" stage {}", i + 1);
        let p = &s.params;
        let f = reweight(p);
        let support = p.support();
        let rh = rh_reports(&f, &bases, &cfg.r, depth, Some(p.b()))?;
        rh_checks(rep, &rh, Some(p), &tag);
        for r in &rh {
            rep.constant("rh_rth_power", Some(i + 1), Some(r.base), Some(r.r), r.constant_rth_power.clone());
            rep.point(&format!("RH^{} n={}", r.r, r.base), ExactRational::from(p.alpha()), r.constant_rth_power.clone());
        }
        let parts: Vec<Interval> = nice_decomposition(p).pieces.into_iter().map(|(i, _)| i).collect();
        for &r in &cfg.r {
            let sub = subdivision_bound_check(&f, &support, &parts, r)?;
            rep.check(Check::le(&format!("subdivision general bound{tag} r={r}"), sub.whole_rth_power.clone(), sub.general_bound.clone()));
            if r >= 2 {
                let ar = ar_constant(&reweight_swapped(p), &support, r, DEFAULT_BITS)?;
                rep.constant("ar_upper", Some(i + 1), None, Some(r), ar.value.hi.clone());
                all_rh.push(serde_json::json!({ "stage": i + 1, "ar": ar }));
            }
        }
        all_rh.push(serde_json::json!({ "stage": i + 1, "rh": rh }));
    }
    rep.put("per_stage", &all_rh)?;
    let params: Vec<ReweightParams> = built.iter().map(|s| s.params.clone()).collect();
    if params.len() > 1 {
        for &r in &cfg.r {
            let g = overall_rh_growth(&params, r)?;
            for (i, (_, v)) in g.values.iter().enumerate() {
                rep.constant("anchored_rh_rth_power", Some(i + 1), None, Some(r), v.clone());
                rep.point(&format!("anchored RH^{r}"), ExactRational::from(params[i].alpha()), v.clone());
            }
            rep.check(Check::holds(&format!("anchored RH constants strictly increase r={r}"), g.strictly_increasing, ""));
            rep.put(&format!("anchored_growth_r{r}"), &g)?;
        }
    }
    Ok(())
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::SingleStage => "single-stage",
        Mode::Ray => "ray",
        Mode::Nested => "nested",
        Mode::Motivating => "motivating",
        Mode::Lemma4 => "lemma4",
        Mode::Weights => "weights",
    }
}

/// Computation errors past validation become a failed check so the report
/// still records what went wrong.
fn finish(mut rep: Report, res: Result<()>) -> Report {
    if let Err(e) = res {
        rep.check(Check::holds("computation completed", false, e.to_string()));
    }
    rep
}

/// Runs the configured experiment. Validation errors return `Err` before
/// anything is computed.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut rep = Report::new(mode_name(cfg.mode));
    rep.put("config", cfg)?;
    let res = match cfg.mode {
        Mode::SingleStage => single_stage(cfg, &mut rep),
        Mode::Ray => ray(cfg, &mut rep),
        Mode::Nested => nested(cfg, &mut rep),
        Mode::Motivating => motivating(cfg, &mut rep),
        Mode::Lemma4 => lemma4(cfg, &mut rep),
        Mode::Weights => weights(cfg, &mut rep),
    };
    Ok(finish(rep, res))
}

/// The invariant suite on the configuration's first stage (or the default
/// stage): construction invariants, bound inequalities, small oracle
/// comparisons, subdivision and covering checks.
pub fn verify_all(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut rep = Report::new("verify");
    rep.put("config", cfg)?;
    let res = verify_inner(cfg, &mut rep);
    Ok(finish(rep, res))
}

const RANDOM_CASES: usize = 10;

fn verify_inner(cfg: &ExperimentConfig, rep: &mut Report) -> Result<()> {
    let fallback = ExperimentConfig::default_single_stage();
    let st = cfg.stage.first().unwrap_or(&fallback.stage[0]);
    let bases = cfg.bases();
    let s = build_stage(cfg, st, &bases)?;
    let p = &s.params;
    let f = match &cfg.density {
        Some(path) => load_density(path)?,
        None => reweight(p),
    };
    rep.put("stage", &stage_summary(&s))?;
    rep.check(Check::holds("centre is an epsilon-witness for every base", s.witness.verify(), ""));
    stage_structure_checks(rep, &s, &f, "");

    for &n in &bases {
        let u = NAdicInterval::new(n, 0, 1)?;
        let kids = u.children();
        let tiles = kids.first().map(|k| k.lo()) == Some(u.lo())
            && kids.last().map(|k| k.hi()) == Some(u.hi())
            && kids.windows(2).all(|w| w[0].hi() == w[1].lo());
        rep.check(Check::holds(&format!("children partition the unit interval n={n}"), tiles, ""));
    }

    let depth = cfg.depth.to_depth();
    for d in doubling_reports(&f, &bases, depth)? {
        let name = format!("n-adic doubling bound n={}", d.base);
        match growth_bound_upper(p, &s.epsilon, d.base) {
            Some(ub) => rep.check(Check::le(&name, d.bound(), ub).with_witness(&d.witness)),
            None => rep.check(Check::not_applicable(&name, "epsilon too large for the slack estimate")),
        }
        rep.constant("doubling", Some(1), Some(d.base), None, d.constant.clone());
    }
    let rh = rh_reports(&f, &bases, &cfg.r, depth, Some(p.b()))?;
    rh_checks(rep, &rh, Some(p), "");

    for &n in bases.iter().filter(|&&n| n <= 5) {
        let level = 3;
        let pruned = nadic_doubling_constant(&f, n, Depth::Max(level))?;
        let (brute, _) = brute_doubling(&f, n, level);
        rep.check(Check::eq(&format!("oracle equivalence: doubling n={n} levels<=3"), pruned.constant, brute));
        for &r in &cfg.r {
            let pr = nadic_rh_constant(&f, n, r, Depth::Max(level), None)?;
            let (br, _) = brute_rh(&f, n, r, level);
            rep.check(Check::eq(&format!("oracle equivalence: RH n={n} r={r} levels<=3"), pr.constant_rth_power, br));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let mut mismatches = Vec::new();
    for case in 0..RANDOM_CASES {
        let g = random_density(&mut rng, 12);
        for n in [2, 3, 5] {
            let pruned = nadic_doubling_constant(&g, n, Depth::Max(4))?.constant;
            let pruned_rh = nadic_rh_constant(&g, n, 2, Depth::Max(4), None)?.constant_rth_power;
            if pruned != brute_doubling(&g, n, 4).0 || pruned_rh != brute_rh(&g, n, 2, 4).0 {
                mismatches.push((case, n));
            }
        }
    }
    rep.check(
        Check::holds(&format!("oracle equivalence: {RANDOM_CASES} random densities, levels<=4"), mismatches.is_empty(), "")
            .with_witness(&mismatches),
    );

    let support = p.support();
    let parts: Vec<Interval> = nice_decomposition(p).pieces.into_iter().map(|(i, _)| i).collect();
    let around = [
        iv(ExactRational::zero(), support.lo().clone()),
        support.clone(),
        iv(support.hi().clone(), one()),
    ];
    for &r in &cfg.r {
        let sub = subdivision_bound_check(&f, &support, &parts, r)?;
        rep.check(Check::le(&format!("subdivision general bound r={r}"), sub.whole_rth_power, sub.general_bound));
        let eq = subdivision_bound_check(&f, &iv(ExactRational::zero(), one()), &around, r)?;
        match eq.equal_average_holds {
            Some(ok) => rep.check(Check::holds(&format!("subdivision equal-average bound r={r}"), ok, "")),
            None => rep.check(Check::holds(&format!("subdivision equal-average bound r={r}"), false, "averages differ")),
        }
    }

    let i1 = iv(ExactRational::zero(), ExactRational::new(1, 10));
    let i2 = iv(ExactRational::new(1, 10), ExactRational::new(1, 5));
    let m = ExactRational::from(2);
    let seq = [100u32, 1000, 10_000, 100_000]
        .iter()
        .map(|&n| covering_bound(&i1, &i2, n, &m))
        .collect::<Result<Vec<_>>>()?;
    let decreasing = seq.windows(2).all(|w| w[1] < w[0]) && seq.iter().all(|b| *b > m);
    rep.check(Check::holds("covering bound decreases towards M", decreasing, "").with_witness(&seq));
    Ok(())
}

/// One line per check: status then name.
pub fn matrix(rep: &Report) -> String {
    rep.checks
        .iter()
        .map(|c| {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::NotApplicable => "N/A ",
            };
            if c.detail.is_empty() {
                format!("{tag}  {}\n", c.name)
            } else {
                format!("{tag}  {}  ({})\n", c.name, c.detail)
            }
        })
        .collect()
}

/// Computes the report, then writes all three files.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<Report> {
    let rep = run(cfg)?;
    rep.write_to(dir)?;
    Ok(rep)
}
