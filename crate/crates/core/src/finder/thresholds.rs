use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::ThresholdError;

/// How the adjusting phase constrains successive pivots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PivotGating {
    /// Step `s` must pivot inside section `s`, sections numbered from the
    /// moving end.
    Sections,
    /// Each pivot lies strictly closer to the fixed start than the last.
    Monotone,
}

impl FromStr for PivotGating {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "sections" => Ok(Self::Sections),
            "monotone" => Ok(Self::Monotone),
            _ => Err(()),
        }
    }
}

impl fmt::Display for PivotGating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sections => "sections",
            Self::Monotone => "monotone",
        })
    }
}

/// Knobs of the search. Size thresholds live in `[1, n]`; the two budgets
/// and the restart cap are only required to be positive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Thresholds {
    /// Remaining mass below which cycle merging probes from the small side.
    pub small_remainder: usize,
    /// Probe vertices per batch when merging from the large side.
    pub probe_batch: usize,
    /// Number of cloned paths.
    pub clone_count: usize,
    /// Ends wanted on each half before adjusting.
    pub endset_target: usize,
    /// Survivors wanted on each side after adjusting.
    pub adjusted_target: usize,
    /// Reveals plus rotations allowed per phase invocation.
    pub rotation_budget: usize,
    /// Soft cap on the inactive set; exceeding it is reported, not enforced.
    pub deactivation_budget: usize,
    pub max_restarts: u32,
    pub pivot_gating: PivotGating,
}

pub const KEYS: &[&str] = &[
    "small_remainder",
    "probe_batch",
    "clone_count",
    "endset_target",
    "adjusted_target",
    "rotation_budget",
    "deactivation_budget",
    "max_restarts",
    "pivot_gating",
];

fn ceil_pow(n: f64, e: f64) -> usize {
    n.powf(e).ceil() as usize
}

impl Thresholds {
    /// Defaults for fiber size `n`, natural logarithms throughout.
    pub fn defaults(n: usize) -> Self {
        let nf = n as f64;
        let ln2 = nf.ln().powi(2);
        let t = Self {
            small_remainder: ceil_pow(nf, 0.9),
            probe_batch: ceil_pow(nf, 1.0 / 3.0),
            clone_count: ln2.ceil() as usize,
            endset_target: (nf.powf(0.6) * ln2).ceil() as usize,
            adjusted_target: ceil_pow(nf, 0.6),
            rotation_budget: 50 * n,
            deactivation_budget: ceil_pow(nf, 5.0 / 6.0),
            max_restarts: 5,
            pivot_gating: PivotGating::Sections,
        };
        t.clamped(n)
    }

    /// Clamps the size thresholds into `[1, n]`, keeps the budgets positive
    /// and lifts `endset_target` to at least `adjusted_target`.
    pub fn clamped(mut self, n: usize) -> Self {
        let n = n.max(1);
        for v in [
            &mut self.small_remainder,
            &mut self.probe_batch,
            &mut self.clone_count,
            &mut self.endset_target,
            &mut self.adjusted_target,
            &mut self.deactivation_budget,
        ] {
            *v = (*v).clamp(1, n);
        }
        self.rotation_budget = self.rotation_budget.max(1);
        self.endset_target = self.endset_target.max(self.adjusted_target);
        self
    }

    /// Applies one `KEY=VALUE` override. Call [`Self::clamped`] afterwards.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ThresholdError> {
        let bad = || ThresholdError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        let num = || value.parse::<usize>().map_err(|_| bad());
        match key {
            "small_remainder" => self.small_remainder = num()?,
            "probe_batch" => self.probe_batch = num()?,
            "clone_count" => self.clone_count = num()?,
            "endset_target" => self.endset_target = num()?,
            "adjusted_target" => self.adjusted_target = num()?,
            "rotation_budget" => self.rotation_budget = num()?,
            "deactivation_budget" => self.deactivation_budget = num()?,
            "max_restarts" => self.max_restarts = value.parse().map_err(|_| bad())?,
            "pivot_gating" => self.pivot_gating = value.parse().map_err(|_| bad())?,
            _ => return Err(ThresholdError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Defaults for `n` with `KEY=VALUE` overrides applied, then clamped.
    pub fn with_overrides<S: AsRef<str>>(n: usize, overrides: &[S]) -> Result<Self, ThresholdError> {
        let mut t = Self::defaults(n);
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| ThresholdError::Syntax(o.to_string()))?;
            t.set(k.trim(), v.trim())?;
        }
        Ok(t.clamped(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_at_1000() {
        let t = Thresholds::defaults(1000);
        assert_eq!(t.small_remainder, 502);
        assert_eq!(t.probe_batch, 10);
        assert_eq!(t.clone_count, 48);
        assert_eq!(t.adjusted_target, 64);
        assert_eq!(t.endset_target, 1000);
        assert_eq!(t.deactivation_budget, 317);
        assert_eq!(t.rotation_budget, 50_000);
    }

    #[test]
    fn tiny_n_clamps_to_one() {
        let t = Thresholds::defaults(1);
        assert_eq!(
            (
                t.small_remainder,
                t.probe_batch,
                t.clone_count,
                t.endset_target,
                t.adjusted_target
            ),
            (1, 1, 1, 1, 1)
        );
        let t = Thresholds::defaults(3);
        assert!(t.endset_target <= 3 && t.endset_target >= t.adjusted_target);
    }

    #[test]
    fn overrides_parse_and_clamp() {
        let t = Thresholds::with_overrides(
            100,
            &["clone_count=7", "endset_target=5000", "pivot_gating=sections"],
        )
        .unwrap();
        assert_eq!(t.clone_count, 7);
        assert_eq!(t.endset_target, 100);
        assert_eq!(t.pivot_gating, PivotGating::Sections);
        assert!(matches!(
            Thresholds::with_overrides(100, &["nope=1"]),
            Err(ThresholdError::UnknownKey(_))
        ));
        assert!(matches!(
            Thresholds::with_overrides(100, &["clone_count"]),
            Err(ThresholdError::Syntax(_))
        ));
        assert!(matches!(
            Thresholds::with_overrides(100, &["clone_count=x"]),
            Err(ThresholdError::BadValue { .. })
        ));
    }
}
