//! Batch experiments over seeded trials, reported as CSV tables.
//!
//! Trial `i` of every batch is seeded with `split(base_seed, i)`. Trials run
//! on a rayon pool of the requested size and are collected in trial order,
//! so every table is a deterministic function of the [`ExperimentSpec`]
//! unless wall-clock timing is switched on.

use std::io;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::base::{BaseGraph, BaseInstance};
use crate::error::{StructuralError, ThresholdError};
use crate::finder::{self, RunOptions, Thresholds, TrialReport};
use crate::lift::LiftState;
use crate::oracle::{summarize_cycle_counts, verify_hamilton_cycle};
use crate::rng::{rng_from_seed, split};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error(transparent)]
    Structural(#[from] StructuralError),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub instance: BaseInstance,
    pub ns: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    /// `KEY=VALUE` threshold overrides applied on top of the defaults of each `n`.
    pub overrides: Vec<String>,
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
    /// Adds wall-clock columns. Tables are no longer reproducible.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(instance: BaseInstance, ns: Vec<usize>, trials: usize, base_seed: u64) -> Self {
        Self {
            instance,
            ns,
            trials,
            base_seed,
            overrides: Vec::new(),
            workers: None,
            timing: false,
        }
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Spec("trials must be at least 1".into()));
        }
        if self.ns.is_empty() || self.ns.contains(&0) {
            return Err(HarnessError::Spec(
                "n values must be positive and non-empty".into(),
            ));
        }
        if self.workers == Some(0) {
            return Err(HarnessError::Spec("workers must be positive".into()));
        }
        for &n in &self.ns {
            Thresholds::with_overrides(n, &self.overrides)?;
        }
        Ok(())
    }

    pub fn trial_seed(&self, i: usize) -> u64 {
        split(self.base_seed, i as u64)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, HarnessError> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.workers {
            b = b.num_threads(w);
        }
        b.build().map_err(|e| HarnessError::Pool(e.to_string()))
    }
}

/// A CSV table held in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), HarnessError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Values of the column named `name`.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

/// One trial of a batch.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    pub report: TrialReport,
    /// A Hamilton cycle was reported and passed the independent verifier.
    pub verified: bool,
    pub wall_micros: Option<u64>,
}

/// Runs `spec.trials` trials at fiber size `n`, re-verifying every reported
/// cycle against the lift it was found in. Records come back in trial order.
pub fn run_trials(spec: &ExperimentSpec, n: usize) -> Result<Vec<TrialRecord>, HarnessError> {
    spec.check()?;
    let th = Thresholds::with_overrides(n, &spec.overrides)?;
    let options = RunOptions {
        record_timings: spec.timing,
        keep_lift: true,
    };
    spec.pool()?.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|i| {
                let t0 = Instant::now();
                let out = finder::run(&spec.instance, n, &th, spec.trial_seed(i), &options)?;
                let wall = t0.elapsed().as_micros() as u64;
                let verified = match (&out.report.cycle, &out.lift) {
                    (Some(c), Some(lift)) => verify_hamilton_cycle(lift, c).ok,
                    _ => false,
                };
                Ok(TrialRecord {
                    index: i,
                    report: out.report,
                    verified,
                    wall_micros: spec.timing.then_some(wall),
                })
            })
            .collect()
    })
}

/// Median of integer samples, averaging the middle pair; `None` when empty.
pub fn median(values: &[u64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m] as f64
    } else {
        (v[m - 1] + v[m]) as f64 / 2.0
    })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.1}")).unwrap_or_default()
}

/// `n^{5/6}`, the deactivation budget scale.
pub fn budget_curve(n: usize) -> f64 {
    (n as f64).powf(5.0 / 6.0)
}

/// `10 · n^{4/5} · ln n`, the reference bound on the inactive set.
pub fn reference_curve(n: usize) -> f64 {
    let nf = n as f64;
    10.0 * nf.powf(0.8) * nf.ln()
}

/// Per-`n` success counts. Reveals and `|D|` medians are over verified
/// successes; the restart median is over all trials.
pub fn success_rate_table(spec: &ExperimentSpec, batches: &[(usize, Vec<TrialRecord>)]) -> Table {
    let mut header = vec![
        "n",
        "trials",
        "successes",
        "success_fraction",
        "median_reveals",
        "median_inactive",
        "median_restarts",
    ];
    if spec.timing {
        header.push("wall_ms");
    }
    let mut t = Table::new(&header);
    for (n, recs) in batches {
        let ok: Vec<&TrialRecord> = recs.iter().filter(|r| r.verified).collect();
        let reveals: Vec<u64> = ok.iter().map(|r| r.report.last.reveals).collect();
        let inactive: Vec<u64> = ok.iter().map(|r| r.report.last.inactive_count as u64).collect();
        let restarts: Vec<u64> = recs.iter().map(|r| r.report.restarts as u64).collect();
        let mut row = vec![
            n.to_string(),
            recs.len().to_string(),
            ok.len().to_string(),
            format!("{:.4}", ok.len() as f64 / recs.len() as f64),
            fmt_opt(median(&reveals)),
            fmt_opt(median(&inactive)),
            fmt_opt(median(&restarts)),
        ];
        if spec.timing {
            let micros: u64 = recs.iter().filter_map(|r| r.wall_micros).sum();
            row.push(format!("{:.1}", micros as f64 / 1000.0));
        }
        t.rows.push(row);
    }
    t
}

/// One row per trial comparing `|D|` with the two reference curves.
pub fn deactivation_table(batches: &[(usize, Vec<TrialRecord>)]) -> Table {
    let mut t = Table::new(&[
        "n",
        "trial",
        "seed",
        "outcome",
        "verified",
        "reveals",
        "inactive_count",
        "vertex_count",
        "budget_curve",
        "reference_curve",
        "within_budget",
        "within_reference",
    ]);
    for (n, recs) in batches {
        let (budget, reference) = (budget_curve(*n), reference_curve(*n));
        for r in recs {
            let d = r.report.last.inactive_count as f64;
            t.rows.push(vec![
                n.to_string(),
                r.index.to_string(),
                r.report.seed.to_string(),
                r.report.outcome.as_str().to_string(),
                r.verified.to_string(),
                r.report.last.reveals.to_string(),
                r.report.last.inactive_count.to_string(),
                (r.report.k * n).to_string(),
                format!("{budget:.3}"),
                format!("{reference:.3}"),
                (d <= budget).to_string(),
                (d <= reference).to_string(),
            ]);
        }
    }
    t
}

/// [`run_trials`] for every `n` of the spec, in spec order.
pub fn run_batches(spec: &ExperimentSpec) -> Result<Vec<(usize, Vec<TrialRecord>)>, HarnessError> {
    spec.ns.iter().map(|&n| Ok((n, run_trials(spec, n)?))).collect()
}

pub fn experiment_success_rate(spec: &ExperimentSpec) -> Result<Table, HarnessError> {
    Ok(success_rate_table(spec, &run_batches(spec)?))
}

pub fn experiment_deactivation(spec: &ExperimentSpec) -> Result<Table, HarnessError> {
    Ok(deactivation_table(&run_batches(spec)?))
}

/// Basic-cycle counts of the lift of the cycle through `order`, trial `i`
/// sampled from `split(seed, i)`.
pub fn basic_cycle_counts(
    order: &[usize],
    n: usize,
    trials: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<usize>, HarnessError> {
    let graph = std::sync::Arc::new(BaseGraph::cycle(order)?);
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    let pool = b.build().map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut lift = LiftState::new(graph.clone(), order, n, rng_from_seed(split(seed, i as u64)));
                lift.lift_h1().len()
            })
            .collect()
    }))
}

/// Distribution of basic-cycle counts of the lifted H₁ cycle against the
/// harmonic mean and the `2 ln n` bound.
pub fn experiment_basic_cycles(spec: &ExperimentSpec) -> Result<Table, HarnessError> {
    spec.check()?;
    let mut t = Table::new(&[
        "n",
        "trials",
        "mean",
        "harmonic",
        "relative_error",
        "min",
        "median",
        "p90",
        "p99",
        "max",
        "two_ln_n",
        "fraction_above_two_ln_n",
    ]);
    for &n in &spec.ns {
        let counts = basic_cycle_counts(
            spec.instance.h1_order(),
            n,
            spec.trials,
            spec.base_seed,
            spec.workers,
        )?;
        let s = summarize_cycle_counts(n, spec.base_seed, &counts);
        t.rows.push(vec![
            n.to_string(),
            s.trials.to_string(),
            format!("{:.4}", s.mean),
            format!("{:.4}", s.harmonic),
            format!("{:.4}", (s.mean - s.harmonic).abs() / s.harmonic),
            s.min.to_string(),
            s.median.to_string(),
            s.p90.to_string(),
            s.p99.to_string(),
            s.max.to_string(),
            format!("{:.4}", 2.0 * (n as f64).ln()),
            format!("{:.4}", s.frac_above_2ln),
        ]);
    }
    Ok(t)
}
