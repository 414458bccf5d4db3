use std::fmt::Write as _;

use serde::Serialize;

use crate::lift::LiftVertex;

pub const PHASES: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Hamilton,
    Failure,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Hamilton => "hamilton",
            Outcome::Failure => "failure",
        }
    }
}

/// Why an attempt was abandoned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// Cycle merging ran out of probe vertices.
    MergeExhausted,
    /// A phase exceeded its reveal-plus-rotation budget.
    BudgetExhausted { phase: u8 },
    /// No rotation produced the ends the phase needed.
    Stalled { phase: u8 },
    /// Fewer survivors than required after adjusting.
    TooFewSurvivors { first: usize, second: usize },
    /// No closing edge between the adjusted end sets.
    NoClosingEdge,
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::MergeExhausted => write!(f, "merge exhausted"),
            Self::BudgetExhausted { phase } => write!(f, "budget exhausted in phase {phase}"),
            Self::Stalled { phase } => write!(f, "stalled in phase {phase}"),
            Self::TooFewSurvivors { first, second } => {
                write!(f, "too few survivors after adjusting ({first}, {second})")
            }
            Self::NoClosingEdge => write!(f, "no closing edge between adjusted ends"),
        }
    }
}

/// Counters of one attempt.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AttemptMetrics {
    pub basic_cycles_initial: usize,
    /// Invocations of phases 1 through 7.
    pub phase_invocations: [u32; PHASES],
    pub rotations: u64,
    pub reveals: u64,
    pub inactive_count: usize,
    /// Vertices off the main path left inactive by merge probes.
    pub stray_inactive: usize,
    pub closings: u32,
    pub failure: Option<FailureReason>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialReport {
    pub seed: u64,
    pub k: usize,
    pub n: usize,
    pub outcome: Outcome,
    /// Restarts used: the number of attempts minus one.
    pub restarts: u32,
    /// Metrics of the last attempt.
    pub last: AttemptMetrics,
    /// Why each abandoned attempt failed, in order.
    pub attempt_failures: Vec<FailureReason>,
    /// Reveals summed over all attempts.
    pub total_reveals: u64,
    pub deactivation_budget: usize,
    pub deactivation_budget_exceeded: bool,
    /// The adjusting target edge lies on H₂ because G = H₁ ∪ H₂.
    pub target_edge_fallback: bool,
    pub target_edge: (usize, usize),
    /// Set only on success; passed the independent verifier.
    pub cycle: Option<Vec<LiftVertex>>,
    /// Wall-clock microseconds per phase, summed over attempts. Only filled
    /// when timing is requested, so reports stay reproducible otherwise.
    pub phase_micros: Option<[u64; PHASES]>,
}

impl TrialReport {
    pub fn succeeded(&self) -> bool {
        self.outcome == Outcome::Hamilton
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// One `base fiber` pair per line.
    pub fn cycle_text(&self) -> Option<String> {
        self.cycle.as_ref().map(|c| {
            let mut out = String::new();
            for v in c {
                let _ = writeln!(out, "{} {}", v.base, v.fiber);
            }
            out
        })
    }

    pub fn csv_header(timing: bool) -> Vec<String> {
        let mut h: Vec<String> = [
            "seed",
            "outcome",
            "n",
            "reveals",
            "inactive_count",
            "restarts",
            "basic_cycles_initial",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        h.extend((1..=PHASES).map(|p| format!("phase{p}_calls")));
        if timing {
            h.extend((1..=PHASES).map(|p| format!("phase{p}_micros")));
        }
        h
    }

    pub fn csv_record(&self, timing: bool) -> Vec<String> {
        let mut r = vec![
            self.seed.to_string(),
            self.outcome.as_str().to_string(),
            self.n.to_string(),
            self.last.reveals.to_string(),
            self.last.inactive_count.to_string(),
            self.restarts.to_string(),
            self.last.basic_cycles_initial.to_string(),
        ];
        r.extend(self.last.phase_invocations.iter().map(u32::to_string));
        if timing {
            let micros = self.phase_micros.unwrap_or_default();
            r.extend(micros.iter().map(u64::to_string));
        }
        r
    }
}

/// Parses a cycle written by [`TrialReport::cycle_text`].
pub fn parse_cycle(text: &str) -> Result<Vec<LiftVertex>, crate::error::StructuralError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Result<Vec<usize>, _> = line.split_whitespace().map(str::parse).collect();
        match nums {
            Ok(v) if v.len() == 2 => out.push(LiftVertex::new(v[0], v[1])),
            _ => {
                return Err(crate::error::StructuralError::Parse {
                    line: i + 1,
                    msg: format!("expected `base fiber`, got `{line}`"),
                })
            }
        }
    }
    Ok(out)
}
