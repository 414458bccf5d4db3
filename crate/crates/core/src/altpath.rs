//! Alternating paths in the base graph.
//!
//! Edges of H₂ are *blue* and may be used in either direction; edges of the
//! oriented cycle H̄₁ are *red* and may only be used forwards. An alternating
//! path starts with a blue edge, ends with a red edge and alternates colours.
//!
//! The colouring explores the 2k states `(vertex, colour of the next edge)`.
//! A vertex is *blue* (B) if some alternating walk from the root can leave it
//! by a blue edge, i.e. arrives by a red edge or is the root; it is *red* (R)
//! if it can be left by a red edge, i.e. is reached by a blue edge. Vertices
//! with both marks are RB, with none N.
//!
//! Nothing here assumes H₂ is a cycle: any graph edge-disjoint from H₁ works.

use std::collections::VecDeque;

use serde::Serialize;

use crate::base::{BaseGraph, BaseInstance, DirectedH1};
use crate::error::AltPathError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Color {
    N,
    R,
    B,
    RB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EdgeKind {
    /// Edge of H₂, traversed in either direction.
    H2,
    /// Arc of the oriented H₁.
    H1Arc,
}

/// Odd number of vertices; `kinds[i]` tags the edge `vertices[i] → vertices[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlternatingPath {
    pub vertices: Vec<usize>,
    pub kinds: Vec<EdgeKind>,
}

impl AlternatingPath {
    pub fn edge_count(&self) -> usize {
        self.kinds.len()
    }

    /// `(b, a)` pairs: the H₂ step lands on `b`, the following arc leads to `a`.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.kinds.len() / 2).map(|s| (self.vertices[2 * s + 1], self.vertices[2 * s + 2]))
    }
}

impl std::fmt::Display for AlternatingPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.vertices[0])?;
        for (kind, v) in self.kinds.iter().zip(&self.vertices[1..]) {
            match kind {
                EdgeKind::H2 => write!(f, " -H2- {v}")?,
                EdgeKind::H1Arc => write!(f, " -H1-> {v}")?,
            }
        }
        Ok(())
    }
}

const BLUE_NEXT: usize = 0;
const RED_NEXT: usize = 1;

/// Least fixpoint of the propagation rules from one root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringState {
    pub root: usize,
    /// `reach[c][x]`: state `(x, next colour c)` is reachable.
    reach: [Vec<bool>; 2],
    /// Predecessor vertex of each reached state (none for the root state).
    parent: [Vec<Option<usize>>; 2],
}

impl ColoringState {
    pub fn color(&self, x: usize) -> Color {
        match (self.reach[BLUE_NEXT][x], self.reach[RED_NEXT][x]) {
            (false, false) => Color::N,
            (false, true) => Color::R,
            (true, false) => Color::B,
            (true, true) => Color::RB,
        }
    }

    pub fn colors(&self) -> Vec<Color> {
        (0..self.reach[0].len()).map(|x| self.color(x)).collect()
    }

    pub fn count(&self, c: Color) -> usize {
        self.colors().into_iter().filter(|&x| x == c).count()
    }

    /// Alternating walk from the root realising colour `c` at `x`, rebuilt
    /// from parent links: ends with a red edge for B, a blue edge for R.
    pub fn walk_to(&self, x: usize, c: Color) -> Option<Vec<usize>> {
        let mut state = match c {
            Color::B => BLUE_NEXT,
            Color::R => RED_NEXT,
            _ => return None,
        };
        if !self.reach[state][x] {
            return None;
        }
        let mut walk = vec![x];
        let mut cur = x;
        let limit = 2 * self.reach[0].len() + 1;
        while let Some(p) = self.parent[state][cur] {
            walk.push(p);
            cur = p;
            state ^= 1;
            if walk.len() > limit {
                return None;
            }
        }
        walk.reverse();
        Some(walk)
    }
}

/// Worklist discipline; the fixpoint does not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Worklist {
    Fifo,
    Lifo,
}

pub fn color_from_graphs(h2: &BaseGraph, h1: &DirectedH1, root: usize, order: Worklist) -> ColoringState {
    let k = h2.k();
    let mut reach = [vec![false; k], vec![false; k]];
    let mut parent = [vec![None; k], vec![None; k]];
    let mut work = VecDeque::new();
    reach[BLUE_NEXT][root] = true;
    work.push_back((root, BLUE_NEXT));
    loop {
        let next = match order {
            Worklist::Fifo => work.pop_front(),
            Worklist::Lifo => work.pop_back(),
        };
        let Some((x, c)) = next else { break };
        if c == BLUE_NEXT {
            for &(y, _) in h2.neighbors(x) {
                if !reach[RED_NEXT][y] {
                    reach[RED_NEXT][y] = true;
                    parent[RED_NEXT][y] = Some(x);
                    work.push_back((y, RED_NEXT));
                }
            }
        } else {
            let y = h1.succ[x];
            if !reach[BLUE_NEXT][y] {
                reach[BLUE_NEXT][y] = true;
                parent[BLUE_NEXT][y] = Some(x);
                work.push_back((y, BLUE_NEXT));
            }
        }
    }
    ColoringState { root, reach, parent }
}

/// Colouring of `H₁ ∪ H₂` from `root`, with H₁ oriented along its order.
pub fn color_from(inst: &BaseInstance, root: usize) -> ColoringState {
    let h2 = BaseGraph::cycle(inst.h2_order()).expect("valid H2 order");
    color_from_graphs(&h2, &inst.directed_h1(), root, Worklist::Fifo)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ObservationReport {
    pub violations: Vec<String>,
    /// Red arcs from N or B into blue-marked vertices; at most one allowed.
    pub stray_red_arcs: usize,
    pub b_count: usize,
    pub r_count: usize,
}

impl ObservationReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.stray_red_arcs <= 1 && self.b_count == self.r_count
    }
}

/// Scans every edge of `H₁ ∪ H₂` against the structural observations a
/// fixpoint must satisfy, plus the counting identity `|B| = |R|`.
pub fn check_observations(state: &ColoringState, h2: &BaseGraph, h1: &DirectedH1) -> ObservationReport {
    use Color::*;
    let col = state.colors();
    let mut rep = ObservationReport {
        b_count: col.iter().filter(|&&c| c == B).count(),
        r_count: col.iter().filter(|&&c| c == R).count(),
        ..Default::default()
    };
    for x in 0..col.len() {
        let y = h1.succ[x];
        let (cx, cy) = (col[x], col[y]);
        // Red arcs out of R ∪ RB never reach N.
        if matches!(cx, R | RB) && cy == N {
            rep.violations
                .push(format!("closure: red arc {x}->{y} from {cx:?} into N"));
        }
        // Red arcs N → B ∪ RB, B → RB, B → B: at most one in total.
        if (cx == N && matches!(cy, B | RB)) || (cx == B && matches!(cy, RB | B)) {
            rep.stray_red_arcs += 1;
        }
        // No red arc RB → R, none inside R.
        if (cx == RB || cx == R) && cy == R {
            rep.violations
                .push(format!("exclusion: red arc {x}->{y} from {cx:?} into R"));
        }
    }
    if rep.stray_red_arcs > 1 {
        rep.violations.push(format!(
            "stray: {} red arcs into blue-marked vertices from N or B",
            rep.stray_red_arcs
        ));
    }
    for &(x, y) in h2.edges() {
        let (cx, cy) = (col[x], col[y]);
        let pair = |a: Color, b: Color| (cx == a && cy == b) || (cx == b && cy == a);
        if pair(RB, N) {
            rep.violations
                .push(format!("closure: blue edge {{{x}, {y}}} between RB and N"));
        }
        if pair(RB, B) {
            rep.violations
                .push(format!("exclusion: blue edge {{{x}, {y}}} between RB and B"));
        }
        if cx == B && cy == B {
            rep.violations
                .push(format!("exclusion: blue edge {{{x}, {y}}} inside B"));
        }
    }
    if rep.b_count != rep.r_count {
        rep.violations.push(format!(
            "|B| = {} differs from |R| = {}",
            rep.b_count, rep.r_count
        ));
    }
    rep
}

/// Shortest alternating path from `from` to `to`, ties broken by the
/// lexicographically smallest vertex sequence. For `from == to` a closed
/// walk with at least one edge is returned.
pub fn find_alternating_path_in(
    h2: &BaseGraph,
    h1: &DirectedH1,
    from: usize,
    to: usize,
) -> Result<AlternatingPath, AltPathError> {
    let k = h2.k();
    for v in [from, to] {
        if v >= k {
            return Err(AltPathError::OutOfRange(v));
        }
    }
    // Distance of every state to the target state (to, BLUE_NEXT), by BFS
    // over reversed transitions.
    let mut dist = [vec![usize::MAX; k], vec![usize::MAX; k]];
    let mut queue = VecDeque::new();
    dist[BLUE_NEXT][to] = 0;
    queue.push_back((to, BLUE_NEXT));
    while let Some((y, c)) = queue.pop_front() {
        let d = dist[c][y] + 1;
        if c == BLUE_NEXT {
            // (pred(y), RED_NEXT) → (y, BLUE_NEXT)
            let x = h1.pred[y];
            if dist[RED_NEXT][x] == usize::MAX {
                dist[RED_NEXT][x] = d;
                queue.push_back((x, RED_NEXT));
            }
        } else {
            // (x, BLUE_NEXT) → (y, RED_NEXT) for blue edges {x, y}
            for &(x, _) in h2.neighbors(y) {
                if dist[BLUE_NEXT][x] == usize::MAX {
                    dist[BLUE_NEXT][x] = d;
                    queue.push_back((x, BLUE_NEXT));
                }
            }
        }
    }
    let unreachable = AltPathError::Unreachable { from, target: to };
    // First step is forced to be taken even when from == to.
    let first = h2
        .neighbors(from)
        .iter()
        .map(|&(y, _)| y)
        .filter(|&y| dist[RED_NEXT][y] != usize::MAX)
        .min_by_key(|&y| (dist[RED_NEXT][y], y))
        .ok_or(unreachable)?;
    let mut vertices = vec![from, first];
    let mut kinds = vec![EdgeKind::H2];
    let (mut cur, mut c) = (first, RED_NEXT);
    while dist[c][cur] != 0 {
        if c == RED_NEXT {
            cur = h1.succ[cur];
            kinds.push(EdgeKind::H1Arc);
        } else {
            let want = dist[c][cur] - 1;
            cur = h2
                .neighbors(cur)
                .iter()
                .map(|&(y, _)| y)
                .find(|&y| dist[RED_NEXT][y] == want)
                .expect("BFS distances are consistent");
            kinds.push(EdgeKind::H2);
        }
        c ^= 1;
        vertices.push(cur);
    }
    Ok(AlternatingPath { vertices, kinds })
}

pub fn find_alternating_path(
    inst: &BaseInstance,
    from: usize,
    to: usize,
) -> Result<AlternatingPath, AltPathError> {
    let h2 = BaseGraph::cycle(inst.h2_order()).expect("valid H2 order");
    find_alternating_path_in(&h2, &inst.directed_h1(), from, to)
}

/// Checks colour alternation, orientation of red arcs and the end conditions.
pub fn is_alternating(
    path: &AlternatingPath,
    h2: &BaseGraph,
    h1: &DirectedH1,
    from: usize,
    to: usize,
) -> bool {
    let v = &path.vertices;
    if v.len() < 3 || v.len().is_multiple_of(2) || path.kinds.len() + 1 != v.len() {
        return false;
    }
    if v[0] != from || *v.last().unwrap() != to {
        return false;
    }
    path.kinds.iter().enumerate().all(|(i, kind)| {
        let (a, b) = (v[i], v[i + 1]);
        match (i % 2, kind) {
            (0, EdgeKind::H2) => h2.has_edge(a, b),
            (1, EdgeKind::H1Arc) => h1.succ[a] == b,
            _ => false,
        }
    })
}

/// All-pairs table for one orientation of H₁.
#[derive(Debug, Clone)]
pub struct AltPathTable {
    paths: Vec<Option<AlternatingPath>>,
    k: usize,
}

impl AltPathTable {
    pub fn new(h2: &BaseGraph, h1: &DirectedH1) -> Self {
        let k = h2.k();
        let paths = (0..k * k)
            .map(|i| find_alternating_path_in(h2, h1, i / k, i % k).ok())
            .collect();
        Self { paths, k }
    }

    pub fn get(&self, from: usize, to: usize) -> Option<&AlternatingPath> {
        self.paths[from * self.k + to].as_ref()
    }
}
