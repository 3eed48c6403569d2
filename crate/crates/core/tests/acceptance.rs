//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `UNATTAINABLE` are evaluated exactly as stated and
//! still print FAIL; the process only exits non-zero when some other
//! criterion fails, or when an unattainable one unexpectedly passes.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use nadic_core::analysis::{covering_bound, Anchor};
use nadic_core::construction::{
    motivating_measure, growth_bound_upper, MotivatingKind, ScheduleOptions,
};
use nadic_core::diophantine::relative_error;
use nadic_core::oracle::{brute_doubling, brute_rh, random_density, random_tiling};
use nadic_core::weights::{subdivision_bound_check, uniform_rh_constant_bound};
use nadic_core::{
    adjacent_pair_ratio, convergent_candidates, extreme_pair, find_witness, nadic_doubling_constant,
    nadic_rh_constant, nested_stages, non_doubling_certificate, overall_rh_growth, q, reweight,
    schedule_for_target, Depth, ExactRational, Interval, Measure, ReweightParams, StepDensity,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNATTAINABLE: &[(u32, &str)] = &[
    (1, "the stated list ends in a, but conservation and mirror symmetry force b on the last piece"),
    (3, "no x <= 10^5 is a 10^-3 witness for bases 2..6; the best error there is about 0.0097 (x = 38746)"),
];

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into(), notes: Vec::new() }
    }
}

fn iv(lo: ExactRational, hi: ExactRational) -> Interval {
    Interval::new(lo, hi).unwrap()
}

fn stage_piece_values() -> Outcome {
    let p = ReweightParams::new(q(2, 3), 2, 10).unwrap();
    let (a, b) = (p.a().clone(), p.b().clone());
    let stated = vec![
        a.clone(),
        &b * &a,
        b.pow(3),
        b.pow(2) * &a * &b,
        b.pow(2) * a.pow(2),
        a.pow(2) * b.pow(2),
        a.pow(2) * &b * &a,
        a.pow(3),
        &a * &b,
        a.clone(),
    ];
    let f = reweight(&p);
    let z = p.z();
    let got: Vec<ExactRational> =
        f.pieces().into_iter().filter(|(i, _)| p.support().contains_interval(i)).map(|(_, v)| v).collect();
    // lengths from the splitting procedure: Z/4, Z/8, ..., Z/32, Z/32 per side
    let mut lengths: Vec<ExactRational> = (2..=5).map(|k| &z * ExactRational::pow2(-k)).collect();
    lengths.push(&z * ExactRational::pow2(-5));
    let mut right = lengths.clone();
    right.reverse();
    lengths.extend(right);
    let got_len: Vec<ExactRational> =
        f.pieces().into_iter().filter(|(i, _)| p.support().contains_interval(i)).map(|(i, _)| i.length()).collect();
    let mismatches: Vec<String> = stated
        .iter()
        .zip(&got)
        .enumerate()
        .filter(|(_, (s, g))| s != g)
        .map(|(i, (s, g))| format!("piece {}: stated {s}, computed {g}", i + 1))
        .collect();
    let lengths_ok = got_len == lengths;
    let passed = got.len() == 10 && mismatches.is_empty() && lengths_ok;
    let detail = if passed {
        "all ten values and lengths equal".to_string()
    } else {
        format!("{}; lengths {}", mismatches.join(", "), if lengths_ok { "match" } else { "differ" })
    };
    Outcome::new(passed, detail)
}

fn motivating() -> Outcome {
    let lin = motivating_measure(MotivatingKind::Linear, 0).unwrap();
    let mut bad = Vec::new();
    for n in 2..=10i64 {
        for k in 1..=3i64 {
            let len = ExactRational::int_pow(n as u64, -k);
            let j1 = iv(&len * ExactRational::from(n - 1), &len * ExactRational::from(n));
            let j2 = iv(ExactRational::zero(), len);
            let ratio = lin.measure(&j1).unwrap() / lin.measure(&j2).unwrap();
            if ratio != 2 * n - 1 {
                bad.push(format!("n={n} k={k}: {ratio}"));
            }
        }
    }
    let mut last = ExactRational::zero();
    for j in 1..=20 {
        let t = ExactRational::pow2(-j);
        let r = adjacent_pair_ratio(&lin, &iv(-&t, ExactRational::zero()), &iv(ExactRational::zero(), t.clone())).unwrap();
        if r != ExactRational::from(2) / &t || r <= last {
            bad.push(format!("t=2^-{j}: {r}"));
        }
        last = r;
    }
    Outcome::new(bad.is_empty(), if bad.is_empty() { "27 sibling ratios equal 2n-1; 2/t grows to 2^21".into() } else { bad.join(", ") })
}

/// Single-stage bound check at a given centre for alpha = 1..4.
fn stage_bounds(eps: &ExactRational, x: u64, notes: &mut Vec<String>) -> bool {
    let mut ok = true;
    for alpha in 1..=4 {
        let p = ReweightParams::new(q(2, 3), alpha, x).unwrap();
        let f = reweight(&p);
        let e = extreme_pair(&p);
        let pair_ok = e.ratio == ExactRational::pow2(alpha as i64);
        let mut worst = Vec::new();
        for n in 2..=6 {
            let d = nadic_doubling_constant(&f, n, Depth::Auto).unwrap();
            let ub = growth_bound_upper(&p, eps, n).expect("slack defined");
            let fine = d.bound() <= ub;
            ok &= fine;
            worst.push(format!("C({n})={:.4}{}{:.1}", d.bound().to_f64(), if fine { "<=" } else { ">" }, ub.to_f64()));
        }
        ok &= pair_ok;
        notes.push(format!("alpha={alpha}: pair ratio {} {}; {}", e.ratio, if pair_ok { "= 2^alpha" } else { "!= 2^alpha" }, worst.join(" ")));
    }
    ok
}

fn single_stage_bounds() -> Outcome {
    let bases: Vec<u32> = (2..=6).collect();
    let eps = q(1, 1000);
    match find_witness(&bases, &eps, 100_000).unwrap() {
        Some(w) => {
            let mut notes = Vec::new();
            let ok = stage_bounds(&eps, w.x, &mut notes);
            let mut o = Outcome::new(ok, format!("witness x={} at epsilon 1/1000", w.x));
            o.notes = notes;
            o
        }
        None => {
            let mut o = Outcome::new(false, "find_witness(2..6, 1/1000, 10^5) found no centre");
            let diag = q(1, 100);
            if let Some(w) = find_witness(&bases, &diag, 100_000).unwrap() {
                let worst = w.errors().values().max().cloned().unwrap();
                o.notes.push(format!("diagnostic: epsilon 1/100 gives x={} with max error {:.5}", w.x, worst.to_f64()));
                let ok = stage_bounds(&diag, w.x, &mut o.notes);
                o.notes.push(format!("diagnostic bound inequalities at epsilon 1/100: {}", if ok { "all hold" } else { "violated" }));
            }
            o
        }
    }
}

fn base_three_witness() -> Outcome {
    let w = find_witness(&[3], &q(7, 500), 50).unwrap();
    let conv = convergent_candidates(3, 8).unwrap();
    let Some(w) = w else {
        return Outcome::new(false, "no witness");
    };
    let err = relative_error(3, w.x, w.p[&3]);
    let ok = w.x == 19
        && w.p[&3] == 12
        && err == q(7153, 531441)
        && err < q(7, 500)
        && conv.contains(&(12, 19))
        && conv.contains(&(53, 84));
    Outcome::new(ok, format!("x={}, p3={}, error {err}; convergents {conv:?}", w.x, w.p[&3]))
}

fn nested_target_schedule() -> Outcome {
    let target: BTreeMap<u32, ExactRational> = (2..=8).map(|n| (n, ExactRational::from(n))).collect();
    let s = match schedule_for_target(&target, 3, &ScheduleOptions::default()) {
        Ok(s) => s,
        Err(e) => return Outcome::new(false, format!("schedule: {e}")),
    };
    let separated = s.first_separation_violation().is_none();
    let f = match nested_stages(&s) {
        Ok(f) => f,
        Err(e) => return Outcome::new(false, format!("nested_stages: {e}")),
    };
    let mut notes = Vec::new();
    let mut within = true;
    for (&n, fn_) in &target {
        let d = nadic_doubling_constant(&f, n, Depth::Auto).unwrap();
        let ok = d.bound() <= *fn_ && s.predicted_bound(n) <= *fn_;
        within &= ok;
        notes.push(format!("n={n}: C(n) <= {:.4}, predicted {:.4}, target {n}", d.bound().to_f64(), s.predicted_bound(n).to_f64()));
    }
    let cert = non_doubling_certificate(&f, &Anchor::of_schedule(&s)).unwrap();
    let ratios: Vec<String> = cert.pairs.iter().map(|p| format!("{:.4}", p.ratio.to_f64())).collect();
    let xs: Vec<u64> = s.stages.iter().map(|st| st.params.x()).collect();
    let mut o = Outcome::new(
        separated && within && cert.strictly_increasing,
        format!(
            "centres x={xs:?}; separation {}; ratios [{}] {}",
            if separated { "holds" } else { "violated" },
            ratios.join(", "),
            if cert.strictly_increasing { "increasing" } else { "not increasing" }
        ),
    );
    o.notes = notes;
    o
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut bad = Vec::new();
    let cases = 60;
    for case in 0..cases {
        let f = random_density(&mut rng, 12);
        for n in [2, 3, 5] {
            let pd = nadic_doubling_constant(&f, n, Depth::Max(5)).unwrap();
            let (bd, wd) = brute_doubling(&f, n, 5);
            let pr = nadic_rh_constant(&f, n, 2, Depth::Max(5), None).unwrap();
            let (br, wr) = brute_rh(&f, n, 2, 5);
            if pd.constant != bd || pd.witness != wd || pr.constant_rth_power != br || pr.witness != wr {
                bad.push(format!("case {case} n={n}"));
            }
        }
    }
    Outcome::new(bad.is_empty(), if bad.is_empty() { format!("{cases} densities x 3 bases, doubling and RH r=2 agree with witnesses") } else { bad.join(", ") })
}

/// Rescales `g` on each part so every part has mean 1.
fn equalize(g: &StepDensity, parts: &[Interval]) -> StepDensity {
    let mut pieces = Vec::new();
    for part in parts {
        let m = g.mean(part);
        let mut lo = part.lo().clone();
        for (w, v) in g.overlaps(part) {
            let hi = &lo + &w;
            pieces.push((iv(lo.clone(), hi.clone()), v / &m));
            lo = hi;
        }
    }
    StepDensity::from_pieces(pieces, ExactRational::one()).unwrap()
}

fn subdivision_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(56);
    let unit = iv(q(0, 1), q(1, 1));
    let (mut general, mut equal, mut violations) = (0, 0, 0);
    for i in 0..1000 {
        let g = random_density(&mut rng, 12);
        let k = rng.gen_range(1..=8);
        let parts = random_tiling(&mut rng, &unit, k);
        let r = rng.gen_range(1..=4);
        let f = if i % 2 == 0 { g } else { equalize(&g, &parts) };
        let rep = subdivision_bound_check(&f, &unit, &parts, r).unwrap();
        general += 1;
        violations += usize::from(!rep.general_holds);
        if let Some(ok) = rep.equal_average_holds {
            equal += 1;
            violations += usize::from(!ok);
        }
    }
    Outcome::new(violations == 0, format!("{general} general and {equal} equal-average instances, {violations} violations"))
}

fn covering_convergence() -> Outcome {
    let i1 = iv(q(0, 1), q(1, 10));
    let i2 = iv(q(1, 10), q(1, 5));
    let m = q(2, 1);
    let seq: Vec<ExactRational> = [100u32, 1000, 10_000, 100_000].iter().map(|&n| covering_bound(&i1, &i2, n, &m).unwrap()).collect();
    let at_1000 = seq[1] == q(100, 49);
    let decreasing = seq.windows(2).all(|w| w[1] < w[0]) && seq.iter().all(|b| *b > m);
    let shown: Vec<String> = seq.iter().map(|b| b.to_string()).collect();
    Outcome::new(at_1000 && decreasing, format!("bounds {}", shown.join(" > ")))
}

fn rh_dichotomy() -> Outcome {
    let bases: Vec<u32> = (2..=6).collect();
    let w = find_witness(&bases, &q(1, 50), 100_000).unwrap().expect("1/50 witness");
    let stages: Vec<ReweightParams> = (1..=3).map(|al| ReweightParams::new(q(2, 3), al, w.x).unwrap()).collect();
    let bound = uniform_rh_constant_bound(&stages[0], 2).expect("b^2 < 2");
    let mut bounded = true;
    let mut notes = Vec::new();
    for p in &stages {
        let f = reweight(p);
        let vals: Vec<ExactRational> = bases.iter().map(|&n| nadic_rh_constant(&f, n, 2, Depth::Auto, Some(p.b())).unwrap().bound()).collect();
        bounded &= vals.iter().all(|v| *v <= bound) && uniform_rh_constant_bound(p, 2) == Some(bound.clone());
        let shown: Vec<String> = vals.iter().map(|v| format!("{:.4}", v.to_f64())).collect();
        notes.push(format!("alpha={}: sup C(J)^2 per n = [{}]", p.alpha(), shown.join(", ")));
    }
    let g = overall_rh_growth(&stages, 2).unwrap();
    let shown: Vec<String> = g.values.iter().map(|(_, v)| format!("{:.4}", v.to_f64())).collect();
    let mut o = Outcome::new(
        bounded && g.strictly_increasing,
        format!("x={}; per-n values <= {:.2}; anchored [{}] {}", w.x, bound.to_f64(), shown.join(", "), if g.strictly_increasing { "increasing" } else { "not increasing" }),
    );
    o.notes = notes;
    o
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "single-stage piece values, alpha=2", stage_piece_values),
        (2, "linear example: sibling ratio 2n-1, unbounded adjacent ratio", motivating),
        (3, "single-stage bounds with 10^-3 witnesses for bases 2..6", single_stage_bounds),
        (4, "simultaneous approximation fixture for base 3", base_three_witness),
        (5, "three nested stages for target f(n)=n", nested_target_schedule),
        (6, "pruned suprema equal brute force", oracle_equivalence),
        (7, "subdivision bounds on 1000 random instances", subdivision_suite),
        (8, "covering bound converges to M", covering_convergence),
        (9, "RH constants: bounded per base, growing on anchored intervals", rh_dichotomy),
    ];
    let mut unexpected = Vec::new();
    for (id, title, run) in criteria {
        let t = Instant::now();
        let o = run();
        let dt: Duration = t.elapsed();
        let known = UNATTAINABLE.iter().find(|(k, _)| *k == id);
        println!("criterion {id} {} [{:.2}s] {title}: {}", if o.passed { "PASS" } else { "FAIL" }, dt.as_secs_f64(), o.detail);
        for n in &o.notes {
            println!("    {n}");
        }
        match (o.passed, known) {
            (false, Some((_, why))) => println!("    unattainable as stated: {why}"),
            (false, None) => unexpected.push(format!("criterion {id} failed")),
            (true, Some(_)) => unexpected.push(format!("criterion {id} passed but is listed as unattainable")),
            (true, None) => {}
        }
        if id == 1 && dt.as_secs_f64() >= 1.0 {
            unexpected.push("criterion 1 exceeded its 1 s budget".into());
        }
    }
    if !unexpected.is_empty() {
        eprintln!("{}", unexpected.join("\n"));
        std::process::exit(1);
    }
}
