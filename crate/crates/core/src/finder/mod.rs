//! Rotation-extension search for a Hamilton cycle in a random lift.
//!
//! One attempt samples a fresh lift and runs the phases:
//!
//! 1. lift H₁ into basic cycles and keep the longest as the main cycle;
//! 2. merge the main cycle with a remaining basic cycle into a path;
//! 3. absorb a basic cycle reached from a path end;
//! 4. clone the path into many paths with distinct active ends;
//! 5. split a clone into halves and grow the end sets of both halves;
//! 6. move the ends of each half onto the two fibers of a target base edge;
//! 7. close a path through an edge between those fibers.
//!
//! Any phase may jump back to phase 3 (a basic cycle was reached) or to
//! phase 2 (a non-spanning cycle was closed). Failures restart the trial on
//! a fresh lift, up to [`Thresholds::max_restarts`] times.

mod engine;
mod report;
mod thresholds;
mod tree;

pub use report::{parse_cycle, AttemptMetrics, FailureReason, Outcome, TrialReport, PHASES};
pub use thresholds::{PivotGating, Thresholds, KEYS as THRESHOLD_KEYS};
pub use tree::{NodeId, RotationTree};

use crate::base::BaseInstance;
use crate::error::StructuralError;
use crate::lift::LiftState;
use crate::rng::attempt_rng;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Fill [`TrialReport::phase_micros`]. Makes reports non-reproducible.
    pub record_timings: bool,
    /// Return the lift of the last attempt.
    pub keep_lift: bool,
}

#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub report: TrialReport,
    pub lift: Option<LiftState>,
}

/// Runs one trial. Only structurally broken instances are errors; search
/// failures are reported in the [`TrialReport`].
pub fn run(
    inst: &BaseInstance,
    n: usize,
    thresholds: &Thresholds,
    seed: u64,
    options: &RunOptions,
) -> Result<TrialOutput, StructuralError> {
    if let Some(problem) = inst.hamilton_problem() {
        return Err(StructuralError::NotHamilton(problem));
    }
    if n == 0 {
        return Err(StructuralError::Parse {
            line: 0,
            msg: "fiber size must be positive".into(),
        });
    }
    let (target_edge, fallback) = inst.adjusting_target();
    let mut total_reveals = 0;
    let mut micros = [0u64; PHASES];
    let mut attempt = 0;
    let mut attempt_failures = Vec::new();
    loop {
        let engine = engine::Engine::new(
            inst,
            n,
            thresholds,
            attempt_rng(seed, attempt),
            options.record_timings,
        );
        let result = engine.execute();
        total_reveals += result.metrics.reveals;
        for (m, a) in micros.iter_mut().zip(result.micros) {
            *m += a;
        }
        if let Some(f) = &result.metrics.failure {
            attempt_failures.push(f.clone());
        }
        if result.cycle.is_some() || attempt >= thresholds.max_restarts {
            let inactive = result.metrics.inactive_count;
            let report = TrialReport {
                seed,
                k: inst.k(),
                n,
                outcome: if result.cycle.is_some() {
                    Outcome::Hamilton
                } else {
                    Outcome::Failure
                },
                restarts: attempt,
                last: result.metrics,
                attempt_failures,
                total_reveals,
                deactivation_budget: thresholds.deactivation_budget,
                deactivation_budget_exceeded: inactive > thresholds.deactivation_budget,
                target_edge_fallback: fallback,
                target_edge,
                cycle: result.cycle,
                phase_micros: options.record_timings.then_some(micros),
            };
            return Ok(TrialOutput {
                report,
                lift: options.keep_lift.then_some(result.lift),
            });
        }
        attempt += 1;
    }
}
