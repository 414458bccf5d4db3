//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p liftham-core --test acceptance`.

mod common;

use std::collections::{HashMap, HashSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use liftham::altpath::{
    check_observations, color_from_graphs, find_alternating_path, is_alternating, Worklist,
};
use liftham::base::fixtures;
use liftham::finder::{self, RunOptions, Thresholds, TrialReport};
use liftham::harness::{self, ExperimentSpec, TrialRecord};
use liftham::oracle::{
    alternating_reachability_bruteforce, harmonic, is_hamiltonian_bruteforce, permutation_cycle_count,
    verify_hamilton_cycle, verify_path, ExplicitGraph, DEFAULT_BRUTEFORCE_CAP,
};
use liftham::rng::{rng_from_seed, split};
use liftham::{BaseGraph, BaseInstance, LiftVertex, RotationPath};
use rand::Rng;
use rayon::prelude::*;

use common::*;

const GATE_TRIALS: usize = 200;
const SUCCESS_TRIALS: usize = 50;
const SUCCESS_FLOOR: f64 = 0.9;
const TREND_SLACK: f64 = 0.1;
const TRIAL_TIME_LIMIT: Duration = Duration::from_secs(60);
const BASIC_CYCLE_EXACT_TRIALS: u64 = 100;
const BASIC_CYCLE_STAT_TRIALS: u64 = 1000;
const HARMONIC_TOLERANCE: f64 = 0.05;
const ABOVE_TWO_LN_LIMIT: f64 = 0.01;
const RANDOM_INSTANCES: usize = 50;
const MAX_RANDOM_K: usize = 11;
const UNIFORMITY_TRIALS: u64 = 6000;
const UNIFORMITY_EXPECTED: usize = 1000;
const UNIFORMITY_TOLERANCE: usize = 150;
const ROTATION_OPS: usize = 100_000;
const CROSS_CHECK_TRIALS: u64 = 200;
const BASE_SEED: u64 = 20_240_601;

struct Line {
    id: u8,
    soft: bool,
    pass: bool,
    detail: String,
}

fn line(id: u8, pass: bool, detail: String) -> Line {
    Line {
        id,
        soft: false,
        pass,
        detail,
    }
}

struct Batches {
    small: Vec<TrialRecord>,
    large: Vec<TrialRecord>,
    slowest: Duration,
}

/// Criterion-1 batches; criterion 2 and 10 use their first 50 trials.
fn k7_batches() -> Batches {
    let spec = ExperimentSpec::new(fixtures::k7(), vec![100, 1000], GATE_TRIALS, BASE_SEED);
    let run = |n: usize| {
        let th = Thresholds::defaults(n);
        (0..GATE_TRIALS)
            .into_par_iter()
            .map(|i| {
                let opts = RunOptions {
                    record_timings: false,
                    keep_lift: true,
                };
                let t0 = Instant::now();
                let out = finder::run(&spec.instance, n, &th, spec.trial_seed(i), &opts).unwrap();
                let wall = t0.elapsed();
                // Independent re-check, not the harness flag.
                let verified = match (&out.report.cycle, &out.lift) {
                    (Some(c), Some(l)) => verify_hamilton_cycle(l, c).ok,
                    _ => false,
                };
                (
                    TrialRecord {
                        index: i,
                        report: out.report,
                        verified,
                        wall_micros: None,
                    },
                    wall,
                )
            })
            .collect::<Vec<_>>()
    };
    let (small, t_small): (Vec<_>, Vec<_>) = run(100).into_iter().unzip();
    let (large, t_large): (Vec<_>, Vec<_>) = run(1000).into_iter().unzip();
    let slowest = t_small.into_iter().chain(t_large).max().unwrap_or_default();
    Batches {
        small,
        large,
        slowest,
    }
}

fn criterion_1(b: &Batches) -> Line {
    let reported = b
        .small
        .iter()
        .chain(&b.large)
        .filter(|r| r.report.succeeded())
        .count();
    let bad = b
        .small
        .iter()
        .chain(&b.large)
        .filter(|r| r.report.succeeded() && !r.verified)
        .count();
    line(
        1,
        bad == 0 && reported > 0,
        format!(
            "{reported} reported cycles over {} trials, {bad} failed verification",
            2 * GATE_TRIALS
        ),
    )
}

fn fraction(recs: &[TrialRecord]) -> f64 {
    recs.iter().filter(|r| r.verified).count() as f64 / recs.len() as f64
}

fn criterion_2(b: &Batches) -> Line {
    let large = fraction(&b.large[..SUCCESS_TRIALS]);
    let small = fraction(&b.small[..SUCCESS_TRIALS]);
    let pass = large >= SUCCESS_FLOOR && large >= small - TREND_SLACK && b.slowest < TRIAL_TIME_LIMIT;
    line(
        2,
        pass,
        format!(
            "success n=1000 {large:.2} (>= {SUCCESS_FLOOR}), n=100 {small:.2}; over {GATE_TRIALS} trials {:.3} / {:.3}; slowest trial {:.2?}",
            fraction(&b.large),
            fraction(&b.small),
            b.slowest
        ),
    )
}

fn criterion_3() -> Line {
    let mut mismatches = 0;
    for t in 0..BASIC_CYCLE_EXACT_TRIALS {
        let mut lift = cycle_lift(5, 200, split(BASE_SEED ^ 3, t));
        let found = lift.lift_h1().len();
        if found != permutation_cycle_count(&composed_h1_permutation(&lift)) {
            mismatches += 1;
        }
    }
    line(
        3,
        mismatches == 0,
        format!("{mismatches} mismatches in {BASIC_CYCLE_EXACT_TRIALS} lifts of C5, n=200"),
    )
}

fn criterion_4() -> Line {
    let n = 1000;
    let counts: Vec<usize> = (0..BASIC_CYCLE_STAT_TRIALS)
        .into_par_iter()
        .map(|t| cycle_lift(5, n, split(BASE_SEED ^ 4, t)).lift_h1().len())
        .collect();
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    let h = harmonic(n);
    let limit = 2.0 * (n as f64).ln();
    let above = counts.iter().filter(|&&c| c as f64 > limit).count() as f64 / counts.len() as f64;
    let rel = (mean - h).abs() / h;
    let exact = cycle_count_tail(n, limit.floor() as usize + 1);
    line(
        4,
        rel <= HARMONIC_TOLERANCE && above < ABOVE_TWO_LN_LIMIT,
        format!(
            "mean {mean:.3} vs H_1000 {h:.3} (rel {rel:.4}); fraction above {limit:.2}: {above:.4} (limit {ABOVE_TWO_LN_LIMIT}, exact tail {exact:.4})"
        ),
    )
}

fn small_instances() -> Vec<BaseInstance> {
    instance_pool(RANDOM_INSTANCES, MAX_RANDOM_K, BASE_SEED ^ 5)
}

fn criterion_5(pool: &[BaseInstance]) -> Line {
    let mut failures = Vec::new();
    let mut pairs = 0;
    let mut longest = 0;
    for (idx, inst) in pool.iter().enumerate() {
        let k = inst.k();
        let h1 = inst.directed_h1();
        let h2 = BaseGraph::cycle(inst.h2_order()).unwrap();
        let h2x = ExplicitGraph::new(k, h2.edges());
        for from in 0..k {
            let brute = alternating_reachability_bruteforce(&h2x, &h1, from, 2 * (k - 1));
            for (to, &reachable) in brute.iter().enumerate() {
                pairs += 1;
                match find_alternating_path(inst, from, to) {
                    Ok(p) => {
                        longest = longest.max(p.edge_count());
                        if !is_alternating(&p, &h2, &h1, from, to)
                            || p.edge_count() > 2 * (k - 1)
                            || !reachable
                        {
                            failures.push(format!("instance {idx}: {from}->{to}"));
                        }
                    }
                    Err(_) => failures.push(format!("instance {idx}: {from}->{to} missing")),
                }
            }
        }
    }
    line(
        5,
        failures.is_empty(),
        format!(
            "{} instances, {pairs} ordered pairs, longest {longest} edges, {} failures {:?}",
            pool.len(),
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn criterion_6(pool: &[BaseInstance]) -> Line {
    let mut fixpoints = 0;
    let mut failures = Vec::new();
    for (idx, inst) in pool.iter().enumerate() {
        let h2 = BaseGraph::cycle(inst.h2_order()).unwrap();
        for h1 in [inst.directed_h1(), inst.directed_h1().reversed()] {
            for root in 0..inst.k() {
                for order in [Worklist::Fifo, Worklist::Lifo] {
                    fixpoints += 1;
                    let rep = check_observations(&color_from_graphs(&h2, &h1, root, order), &h2, &h1);
                    if !rep.holds() {
                        failures.push(format!("instance {idx} root {root}: {:?}", rep.violations));
                    }
                }
            }
        }
    }
    line(
        6,
        failures.is_empty(),
        format!(
            "{fixpoints} fixpoints, {} failures {:?}",
            failures.len(),
            failures.first()
        ),
    )
}

fn criterion_7() -> Line {
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for t in 0..UNIFORMITY_TRIALS {
        let mut lift = cycle_lift(3, 3, split(BASE_SEED ^ 7, t));
        lift.reveal_full_edge(0, 1).unwrap();
        *counts.entry(lift.matching(0, 1).unwrap()).or_default() += 1;
    }
    let mut seen: Vec<(Vec<usize>, usize)> = counts.into_iter().collect();
    seen.sort();
    let ok = seen.len() == 6
        && seen
            .iter()
            .all(|(_, c)| c.abs_diff(UNIFORMITY_EXPECTED) <= UNIFORMITY_TOLERANCE);
    let freq: Vec<usize> = seen.iter().map(|(_, c)| *c).collect();
    line(
        7,
        ok,
        format!(
            "{} bijections, counts {freq:?} (expected {UNIFORMITY_EXPECTED} ± {UNIFORMITY_TOLERANCE})",
            seen.len()
        ),
    )
}

fn criterion_8() -> Line {
    let inst = fixtures::k7();
    let mut lift = fresh_lift(&inst, 60, BASE_SEED ^ 8);
    lift.reveal_everything();
    let mut rng = rng_from_seed(BASE_SEED ^ 9);
    let verts = random_walk_path(&lift, usize::MAX, &mut rng);
    let set: HashSet<LiftVertex> = verts.iter().copied().collect();
    let mut path = RotationPath::new(verts, lift.dims());
    let (mut done, mut restore_failures, mut invalid) = (0, 0, 0);
    let mut attempts = 0;
    while done < ROTATION_OPS && attempts < 2 * ROTATION_OPS {
        attempts += 1;
        let m = path.len() - 1;
        let chords: Vec<usize> = lift
            .revealed_neighbors(path.end())
            .filter_map(|(_, w)| path.position(w))
            .filter(|&i| i >= 1 && i + 2 <= m)
            .collect();
        let Some(&i) = chords.get(rng.gen_range(0..chords.len().max(1))) else {
            path.reverse();
            continue;
        };
        let (start, end) = (path.start(), path.end());
        path.rotate(i, &lift).unwrap();
        done += 1;
        // The old end now follows the pivot; rotating at the same pivot restores it.
        let mut back = path.clone();
        back.rotate(i, &lift).unwrap();
        if back.end() != end || back.start() != start || path.start() != start {
            restore_failures += 1;
        }
        if done % 5000 == 0 {
            let now: HashSet<LiftVertex> = path.vertices().iter().copied().collect();
            if now != set || !verify_path(&lift, path.vertices()).ok {
                invalid += 1;
            }
        }
    }
    let now: HashSet<LiftVertex> = path.vertices().iter().copied().collect();
    if now != set || !verify_path(&lift, path.vertices()).ok {
        invalid += 1;
    }
    line(
        8,
        done == ROTATION_OPS && restore_failures == 0 && invalid == 0,
        format!(
            "{done} rotations on a {}-vertex path, {restore_failures} restore failures, {invalid} invalid snapshots",
            path.len()
        ),
    )
}

fn criterion_9() -> Line {
    let inst = fixtures::k5();
    let (mut successes, mut disagreements, mut unflipped) = (0, 0, 0);
    for t in 0..CROSS_CHECK_TRIALS {
        let th = Thresholds::defaults(3);
        let opts = RunOptions {
            record_timings: false,
            keep_lift: true,
        };
        let out = finder::run(&inst, 3, &th, split(BASE_SEED ^ 10, t), &opts).unwrap();
        let (Some(cycle), Some(mut lift)) = (out.report.cycle, out.lift) else {
            continue;
        };
        successes += 1;
        lift.reveal_everything();
        let g = ExplicitGraph::from_lift(&lift);
        if is_hamiltonian_bruteforce(&g, DEFAULT_BRUTEFORCE_CAP) != Ok(true) {
            disagreements += 1;
        }
        let d = lift.dims();
        // One corrupted edge: swap two consecutive vertices whose swap breaks adjacency.
        let len = cycle.len();
        let corrupted = (0..len).find_map(|i| {
            let mut c = cycle.clone();
            c.swap(i, (i + 1) % len);
            let broken = (0..len).any(|j| !g.has_edge(d.id(c[j]), d.id(c[(j + 1) % len])));
            broken.then_some(c)
        });
        let mut duplicated = cycle.clone();
        duplicated[len / 2] = duplicated[0];
        let flips = verify_hamilton_cycle(&lift, &cycle).ok
            && corrupted.is_some_and(|c| !verify_hamilton_cycle(&lift, &c).ok)
            && !verify_hamilton_cycle(&lift, &duplicated).ok;
        if !flips {
            unflipped += 1;
        }
    }
    line(
        9,
        successes > 0 && disagreements == 0 && unflipped == 0,
        format!(
            "{successes}/{CROSS_CHECK_TRIALS} successes on K5, n=3; {disagreements} brute-force disagreements; {unflipped} mutations not caught"
        ),
    )
}

fn criterion_10(b: &Batches) -> Line {
    let n = 1000;
    let mut d: Vec<usize> = b.large[..SUCCESS_TRIALS]
        .iter()
        .filter(|r| r.verified)
        .map(|r| r.report.last.inactive_count)
        .collect();
    d.sort_unstable();
    let median = d.get(d.len() / 2).copied();
    let bound = harness::reference_curve(n);
    Line {
        id: 10,
        soft: true,
        pass: median.is_some_and(|m| m as f64 <= bound),
        detail: format!(
            "median |D| at success {median:?} vs 10 n^(4/5) ln n = {bound:.0}; n^(5/6) = {:.0}",
            harness::budget_curve(n)
        ),
    }
}

fn criterion_11() -> Line {
    let inst = fixtures::k7();
    let reports = |seed| -> Vec<String> {
        [50, 300]
            .iter()
            .map(|&n| {
                finder::run(&inst, n, &Thresholds::defaults(n), seed, &RunOptions::default())
                    .unwrap()
                    .report
                    .to_json()
            })
            .collect()
    };
    let same_reports = (0..5).all(|s| reports(split(BASE_SEED ^ 11, s)) == reports(split(BASE_SEED ^ 11, s)));
    let tables = |workers| {
        let mut spec = ExperimentSpec::new(fixtures::k7(), vec![40, 120], 12, BASE_SEED ^ 12);
        spec.workers = Some(workers);
        let batches = harness::run_batches(&spec).unwrap();
        [
            harness::success_rate_table(&spec, &batches).to_csv_string(),
            harness::deactivation_table(&batches).to_csv_string(),
            harness::experiment_basic_cycles(&spec).unwrap().to_csv_string(),
        ]
    };
    let same_tables = tables(1) == tables(1) && tables(1) == tables(4);
    let csv_rows: Vec<Vec<String>> = (0..2)
        .map(|_| {
            let r: TrialReport = finder::run(&inst, 80, &Thresholds::defaults(80), 5, &RunOptions::default())
                .unwrap()
                .report;
            r.csv_record(false)
        })
        .collect();
    line(
        11,
        same_reports && same_tables && csv_rows[0] == csv_rows[1],
        format!("reports identical: {same_reports}; tables identical across runs and worker counts: {same_tables}"),
    )
}

fn main() -> ExitCode {
    let t0 = Instant::now();
    let batches = k7_batches();
    let pool = small_instances();
    let lines = vec![
        criterion_1(&batches),
        criterion_2(&batches),
        criterion_3(),
        criterion_4(),
        criterion_5(&pool),
        criterion_6(&pool),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(&batches),
        criterion_11(),
    ];
    let mut hard_failures = 0;
    for l in &lines {
        let verdict = if l.pass { "PASS" } else { "FAIL" };
        let tag = if l.soft { " (soft)" } else { "" };
        println!("criterion {:>2}: {verdict}{tag} - {}", l.id, l.detail);
        if !l.pass && !l.soft {
            hard_failures += 1;
        }
    }
    println!("acceptance finished in {:.1?}", t0.elapsed());
    if hard_failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
