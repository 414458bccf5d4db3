//! Independent ground truth: explicit graphs, cycle and path validators,
//! exact Hamiltonicity by backtracking and random-permutation statistics.
//!
//! Nothing here reuses the engine's search code; validators only ask an
//! [`EdgeOracle`] whether two lift vertices are adjacent.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::base::{BaseGraph, DirectedH1};
use crate::error::{OracleError, StructuralError};
use crate::lift::{LiftDims, LiftState, LiftVertex};
use crate::rng::{rng_from_seed, split};

pub const DEFAULT_BRUTEFORCE_CAP: usize = 24;

/// Simple undirected graph on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitGraph {
    adj: Vec<Vec<usize>>,
}

impl ExplicitGraph {
    /// Loops and repeated edges are dropped.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut sets = vec![HashSet::new(); n];
        for &(u, v) in edges {
            if u != v {
                sets[u].insert(v);
                sets[v].insert(u);
            }
        }
        let adj = sets
            .into_iter()
            .map(|s| {
                let mut v: Vec<usize> = s.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect();
        Self { adj }
    }

    /// Every revealed edge of the lift, vertices numbered by [`LiftDims::id`].
    pub fn from_lift(lift: &LiftState) -> Self {
        let d = lift.dims();
        let edges: Vec<_> = lift
            .revealed_edges()
            .into_iter()
            .map(|(a, b)| (d.id(a), d.id(b)))
            .collect();
        Self::new(d.vertex_count(), &edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Adjacency questions a validator may ask about a lift.
pub trait EdgeOracle {
    fn dims(&self) -> LiftDims;
    /// Is `{a.base, b.base}` an edge of the base graph?
    fn is_base_edge(&self, a: usize, b: usize) -> bool;
    /// Is `{a, b}` an edge of the lift?
    fn is_lift_edge(&self, a: LiftVertex, b: LiftVertex) -> bool;
}

impl EdgeOracle for LiftState {
    fn dims(&self) -> LiftDims {
        LiftState::dims(self)
    }

    fn is_base_edge(&self, a: usize, b: usize) -> bool {
        self.graph().has_edge(a, b)
    }

    fn is_lift_edge(&self, a: LiftVertex, b: LiftVertex) -> bool {
        self.has_edge(a, b)
    }
}

/// A lift read back from its `u i v j` edge list.
#[derive(Debug, Clone)]
pub struct ExplicitLift {
    dims: LiftDims,
    /// `(vertex, far base) → far fiber`, both directions.
    partner: HashMap<(LiftVertex, usize), usize>,
    base: Option<BaseGraph>,
}

impl ExplicitLift {
    /// Parses an edge list. The `# lift k=.. n=..` header is optional; without
    /// it the dimensions are inferred from the largest indices seen.
    /// Rejects a vertex with two partners over the same base neighbour.
    pub fn parse(text: &str) -> Result<Self, StructuralError> {
        let mut header: Option<LiftDims> = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(h) = rest.strip_prefix("lift") {
                    let mut k = None;
                    let mut n = None;
                    for tok in h.split_whitespace() {
                        if let Some(x) = tok.strip_prefix("k=") {
                            k = x.parse().ok();
                        } else if let Some(x) = tok.strip_prefix("n=") {
                            n = x.parse().ok();
                        }
                    }
                    if let (Some(k), Some(n)) = (k, n) {
                        header = Some(LiftDims { k, n });
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let nums: Result<Vec<usize>, _> = line.split_whitespace().map(str::parse).collect();
            match nums {
                Ok(v) if v.len() == 4 => {
                    edges.push((LiftVertex::new(v[0], v[1]), LiftVertex::new(v[2], v[3])))
                }
                _ => {
                    return Err(StructuralError::Parse {
                        line: i + 1,
                        msg: format!("expected `u i v j`, got `{line}`"),
                    })
                }
            }
        }
        let dims = header.unwrap_or_else(|| {
            let k = edges
                .iter()
                .map(|(a, b)| a.base.max(b.base) + 1)
                .max()
                .unwrap_or(0);
            let n = edges
                .iter()
                .map(|(a, b)| a.fiber.max(b.fiber) + 1)
                .max()
                .unwrap_or(0);
            LiftDims { k, n }
        });
        let mut partner = HashMap::new();
        for (a, b) in edges {
            for v in [a, b] {
                if !dims.contains(v) {
                    return Err(StructuralError::VertexOutOfRange {
                        vertex: v.base.max(v.fiber),
                        k: dims.k.max(dims.n),
                    });
                }
            }
            if a.base == b.base {
                return Err(StructuralError::SelfLoop(a.base));
            }
            for (x, y) in [(a, b), (b, a)] {
                if let Some(&f) = partner.get(&(x, y.base)) {
                    if f != y.fiber {
                        return Err(StructuralError::Parse {
                            line: 0,
                            msg: format!("{x} has two partners over base vertex {}", y.base),
                        });
                    }
                }
                partner.insert((x, y.base), y.fiber);
            }
        }
        Ok(Self {
            dims,
            partner,
            base: None,
        })
    }

    /// Also require every lift edge to project onto an edge of `base`.
    pub fn with_base(mut self, base: BaseGraph) -> Self {
        self.base = Some(base);
        self
    }

    pub fn edge_count(&self) -> usize {
        self.partner.len() / 2
    }
}

impl EdgeOracle for ExplicitLift {
    fn dims(&self) -> LiftDims {
        self.dims
    }

    fn is_base_edge(&self, a: usize, b: usize) -> bool {
        match &self.base {
            Some(g) => g.has_edge(a, b),
            None => a != b,
        }
    }

    fn is_lift_edge(&self, a: LiftVertex, b: LiftVertex) -> bool {
        self.partner.get(&(a, b.base)) == Some(&b.fiber)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    WrongLength {
        got: usize,
        expected: usize,
    },
    TooShort(usize),
    OutOfRange(LiftVertex),
    Repeated {
        vertex: LiftVertex,
        first: usize,
        second: usize,
    },
    NotBaseEdge {
        position: usize,
        a: LiftVertex,
        b: LiftVertex,
    },
    NotLiftEdge {
        position: usize,
        a: LiftVertex,
        b: LiftVertex,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongLength { got, expected } => {
                write!(f, "sequence has {got} vertices, lift has {expected}")
            }
            Violation::TooShort(len) => write!(f, "sequence of {len} vertices is too short"),
            Violation::OutOfRange(v) => write!(f, "vertex {v} is not in the lift"),
            Violation::Repeated {
                vertex,
                first,
                second,
            } => {
                write!(f, "vertex {vertex} appears at positions {first} and {second}")
            }
            Violation::NotBaseEdge { position, a, b } => write!(
                f,
                "step {position}: {{{}, {}}} is not a base edge ({a} - {b})",
                a.base, b.base
            ),
            Violation::NotLiftEdge { position, a, b } => {
                write!(f, "step {position}: {a} - {b} is not a lift edge")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub ok: bool,
    pub violation: Option<Violation>,
}

impl Verdict {
    fn from(v: Option<Violation>) -> Self {
        Self {
            ok: v.is_none(),
            violation: v,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.violation {
            None => write!(f, "ok"),
            Some(v) => write!(f, "invalid: {v}"),
        }
    }
}

fn first_violation<O: EdgeOracle + ?Sized>(o: &O, seq: &[LiftVertex], closed: bool) -> Option<Violation> {
    let d = o.dims();
    let mut seen = HashMap::with_capacity(seq.len());
    for (i, &v) in seq.iter().enumerate() {
        if !d.contains(v) {
            return Some(Violation::OutOfRange(v));
        }
        if let Some(&first) = seen.get(&v) {
            return Some(Violation::Repeated {
                vertex: v,
                first,
                second: i,
            });
        }
        seen.insert(v, i);
    }
    let steps = if closed {
        seq.len()
    } else {
        seq.len().saturating_sub(1)
    };
    for i in 0..steps {
        let (a, b) = (seq[i], seq[(i + 1) % seq.len()]);
        if !o.is_base_edge(a.base, b.base) {
            return Some(Violation::NotBaseEdge { position: i, a, b });
        }
        if !o.is_lift_edge(a, b) {
            return Some(Violation::NotLiftEdge { position: i, a, b });
        }
    }
    None
}

/// Distinct vertices joined consecutively by lift edges.
pub fn verify_path<O: EdgeOracle + ?Sized>(o: &O, path: &[LiftVertex]) -> Verdict {
    if path.is_empty() {
        return Verdict::from(Some(Violation::TooShort(0)));
    }
    Verdict::from(first_violation(o, path, false))
}

/// A cycle of at least three distinct vertices, wraparound edge included.
pub fn verify_cycle<O: EdgeOracle + ?Sized>(o: &O, cycle: &[LiftVertex]) -> Verdict {
    if cycle.len() < 3 {
        return Verdict::from(Some(Violation::TooShort(cycle.len())));
    }
    Verdict::from(first_violation(o, cycle, true))
}

/// A cycle through each of the `k·n` lift vertices exactly once.
pub fn verify_hamilton_cycle<O: EdgeOracle + ?Sized>(o: &O, cycle: &[LiftVertex]) -> Verdict {
    let expected = o.dims().vertex_count();
    if cycle.len() != expected {
        // Repeats are the more useful diagnosis when present.
        if let Some(v @ (Violation::Repeated { .. } | Violation::OutOfRange(_))) =
            first_violation(o, cycle, true)
        {
            return Verdict::from(Some(v));
        }
        return Verdict::from(Some(Violation::WrongLength {
            got: cycle.len(),
            expected,
        }));
    }
    verify_cycle(o, cycle)
}

/// Exact Hamiltonicity by backtracking, for graphs of at most `cap` vertices
/// (and never more than 64).
pub fn is_hamiltonian_bruteforce(g: &ExplicitGraph, cap: usize) -> Result<bool, OracleError> {
    let n = g.vertex_count();
    let cap = cap.min(64);
    if n > cap {
        return Err(OracleError::TooLarge { size: n, cap });
    }
    if n < 3 || (0..n).any(|v| g.neighbors(v).len() < 2) {
        return Ok(false);
    }
    let adj: Vec<u64> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &w| m | (1 << w)))
        .collect();
    // Neighbours tried in ascending degree order.
    let order: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut nb = g.neighbors(v).to_vec();
            nb.sort_by_key(|&w| (g.neighbors(w).len(), w));
            nb
        })
        .collect();
    let start = (0..n).min_by_key(|&v| (g.neighbors(v).len(), v)).unwrap();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut search = Backtrack {
        adj: &adj,
        order: &order,
        start,
        full,
    };
    Ok(search.extend(start, 1 << start))
}

struct Backtrack<'a> {
    adj: &'a [u64],
    order: &'a [Vec<usize>],
    start: usize,
    full: u64,
}

impl Backtrack<'_> {
    fn extend(&mut self, end: usize, visited: u64) -> bool {
        if visited == self.full {
            return self.adj[end] >> self.start & 1 == 1;
        }
        // Every unvisited vertex needs two usable neighbours: unvisited ones,
        // the current end or the start.
        let usable = !visited | (1 << end) | (1 << self.start);
        let mut rest = self.full & !visited;
        while rest != 0 {
            let w = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if (self.adj[w] & usable).count_ones() < 2 {
                return false;
            }
        }
        for &w in &self.order[end] {
            if visited >> w & 1 == 0 && self.extend(w, visited | 1 << w) {
                return true;
            }
        }
        false
    }
}

/// Proper 2-colourability by trying every colouring; `k ≤ 20`.
pub fn is_bipartite_bruteforce(g: &ExplicitGraph) -> bool {
    let n = g.vertex_count();
    assert!(n <= 20, "exhaustive 2-colouring limited to 20 vertices");
    (0u32..1 << n)
        .any(|mask| (0..n).all(|u| g.neighbors(u).iter().all(|&v| (mask >> u & 1) != (mask >> v & 1))))
}

/// Vertices `u` for which some alternating walk `v → u` (first edge in `h2`,
/// then an `h1` arc, and so on, ending with an arc) of at most `max_edges`
/// edges exists. Plain depth-first enumeration of walks.
pub fn alternating_reachability_bruteforce(
    h2: &ExplicitGraph,
    h1: &DirectedH1,
    v: usize,
    max_edges: usize,
) -> Vec<bool> {
    fn walk(h2: &ExplicitGraph, h1: &DirectedH1, x: usize, left: usize, out: &mut [bool]) {
        if left < 2 {
            return;
        }
        for &b in h2.neighbors(x) {
            let a = h1.succ[b];
            out[a] = true;
            walk(h2, h1, a, left - 2, out);
        }
    }
    let mut out = vec![false; h2.vertex_count()];
    walk(h2, h1, v, max_edges, &mut out);
    out
}

pub fn permutation_cycle_count(perm: &[usize]) -> usize {
    let mut seen = vec![false; perm.len()];
    let mut cycles = 0;
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        cycles += 1;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = perm[x];
        }
    }
    cycles
}

pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleStats {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mean: f64,
    pub harmonic: f64,
    pub min: usize,
    pub median: usize,
    pub p90: usize,
    pub p99: usize,
    pub max: usize,
    /// Fraction of samples with more than `2 ln n` cycles.
    pub frac_above_2ln: f64,
}

/// Cycle counts of `trials` uniform permutations of `0..n`; trial `i` uses
/// the stream seeded with `split(seed, i)`.
pub fn cycle_count_samples(n: usize, trials: usize, seed: u64) -> Vec<usize> {
    (0..trials)
        .map(|i| {
            let mut rng = rng_from_seed(split(seed, i as u64));
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            permutation_cycle_count(&perm)
        })
        .collect()
}

pub fn summarize_cycle_counts(n: usize, seed: u64, samples: &[usize]) -> CycleStats {
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let trials = sorted.len();
    let q = |p: f64| sorted[((p * (trials - 1) as f64).round() as usize).min(trials - 1)];
    let limit = 2.0 * (n as f64).ln();
    CycleStats {
        n,
        trials,
        seed,
        mean: sorted.iter().sum::<usize>() as f64 / trials as f64,
        harmonic: harmonic(n),
        min: sorted[0],
        median: q(0.5),
        p90: q(0.9),
        p99: q(0.99),
        max: sorted[trials - 1],
        frac_above_2ln: sorted.iter().filter(|&&c| c as f64 > limit).count() as f64 / trials as f64,
    }
}

/// Panics if `trials == 0`.
pub fn cycle_count_stats(n: usize, trials: usize, seed: u64) -> CycleStats {
    assert!(trials > 0, "at least one trial");
    summarize_cycle_counts(n, seed, &cycle_count_samples(n, trials, seed))
}
