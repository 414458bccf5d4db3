//! The seven-phase search for one attempt on one lift.

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use super::report::{AttemptMetrics, FailureReason, PHASES};
use super::thresholds::{PivotGating, Thresholds};
use super::tree::{NodeId, RotationTree};
use crate::altpath::AltPathTable;
use crate::base::{BaseGraph, BaseInstance, DirectedH1};
use crate::lift::{LiftDims, LiftState, LiftVertex};
use crate::oracle::{verify_cycle, verify_hamilton_cycle, verify_path};
use crate::rng::TrialRng;
use crate::rotation::RotationPath;

const MAIN: u32 = u32::MAX;

/// Two halves of a split path with their rotation families. Every end of
/// `a` pairs with every end of `b` into a full-length path
/// `reverse(a-path) ++ b-path`.
pub(crate) struct Halves {
    a: RotationTree,
    b: RotationTree,
}

/// A node of a half tree followed by extra rotations made while adjusting.
#[derive(Debug, Clone)]
struct Survivor {
    node: NodeId,
    pivots: Vec<usize>,
    end: LiftVertex,
}

pub(crate) struct Adjusted {
    halves: Halves,
    first: Vec<Survivor>,
    second: Vec<Survivor>,
}

pub(crate) enum Step {
    /// Phase 2 with the given cycle.
    Merge(Vec<LiftVertex>),
    /// Phase 3: the last vertex of `path` has a revealed edge to `w`, which
    /// lies on a remaining basic cycle.
    Absorb {
        path: Vec<LiftVertex>,
        w: LiftVertex,
    },
    Clone(Vec<LiftVertex>),
    Multiply(Vec<RotationPath>),
    Adjust(Box<Halves>),
    Close(Box<Adjusted>),
    /// A cycle over every vertex of the main path.
    Closed(Vec<LiftVertex>),
}

type PhaseResult = Result<Step, FailureReason>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Jump {
    /// Edge to a vertex of a remaining basic cycle.
    Absorb(LiftVertex),
    /// Edge to the fixed start of the same tree.
    CloseStart,
    /// Edge to the end of a node of the other half.
    CloseOther(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    First,
    Second,
}

pub(crate) struct AttemptResult {
    pub metrics: AttemptMetrics,
    pub cycle: Option<Vec<LiftVertex>>,
    pub micros: [u64; PHASES],
    pub lift: LiftState,
}

pub(crate) struct Engine<'a> {
    th: &'a Thresholds,
    lift: LiftState,
    dims: LiftDims,
    /// `MAIN` or the index of the remaining basic cycle holding the vertex.
    owner: Vec<u32>,
    cycles: Vec<Vec<LiftVertex>>,
    alive: Vec<bool>,
    remaining_mass: usize,
    remaining_count: usize,
    /// Off-path vertices deactivated by merge probes.
    stray: Vec<bool>,
    metrics: AttemptMetrics,
    ops: usize,
    phase: u8,
    timing: bool,
    micros: [u64; PHASES],
    target: (usize, usize),
    h1: DirectedH1,
    /// Alternating paths for H₁ oriented forwards and backwards.
    alt: [AltPathTable; 2],
}

impl<'a> Engine<'a> {
    pub fn new(inst: &'a BaseInstance, n: usize, th: &'a Thresholds, rng: TrialRng, timing: bool) -> Self {
        let lift = LiftState::new(inst.graph().clone(), inst.h1_order(), n, rng);
        let dims = lift.dims();
        let h1 = inst.directed_h1();
        let h2 = BaseGraph::cycle(inst.h2_order()).expect("valid H2 order");
        let alt = [
            AltPathTable::new(&h2, &h1),
            AltPathTable::new(&h2, &h1.reversed()),
        ];
        Self {
            th,
            lift,
            dims,
            owner: vec![MAIN; dims.vertex_count()],
            cycles: Vec::new(),
            alive: Vec::new(),
            remaining_mass: 0,
            remaining_count: 0,
            stray: vec![false; dims.vertex_count()],
            metrics: AttemptMetrics::default(),
            ops: 0,
            phase: 1,
            timing,
            micros: [0; PHASES],
            target: inst.adjusting_target().0,
            h1,
            alt,
        }
    }

    pub fn execute(mut self) -> AttemptResult {
        let outcome = self.drive();
        self.metrics.reveals = self.lift.reveal_calls();
        self.metrics.inactive_count = self.lift.inactive_count();
        self.metrics.stray_inactive = (0..self.dims.vertex_count())
            .filter(|&i| self.owner[i] != MAIN && !self.lift.is_active(self.dims.vertex(i)))
            .count();
        let cycle = match outcome {
            Ok(c) => Some(c),
            Err(reason) => {
                self.metrics.failure = Some(reason);
                None
            }
        };
        AttemptResult {
            metrics: self.metrics,
            cycle,
            micros: self.micros,
            lift: self.lift,
        }
    }

    fn drive(&mut self) -> Result<Vec<LiftVertex>, FailureReason> {
        let mut step = self.timed(1, |e| Ok(e.phase1()))?;
        loop {
            step = match step {
                Step::Closed(cycle) => {
                    if self.phase != 1 {
                        self.metrics.closings += 1;
                    }
                    self.check_boundary(&cycle, true, None);
                    if cycle.len() == self.dims.vertex_count() {
                        let verdict = verify_hamilton_cycle(&self.lift, &cycle);
                        assert!(verdict.ok, "engine produced an invalid Hamilton cycle: {verdict}");
                        return Ok(cycle);
                    }
                    Step::Merge(cycle)
                }
                Step::Merge(c) => {
                    self.check_boundary(&c, true, None);
                    self.timed(2, |e| e.phase2(c))?
                }
                Step::Absorb { path, w } => {
                    self.check_boundary(&path, false, Some(w));
                    self.timed(3, |e| Ok(e.phase3(path, w)))?
                }
                Step::Clone(p) => {
                    self.check_boundary(&p, false, None);
                    self.timed(4, |e| e.phase4(p))?
                }
                Step::Multiply(ps) => {
                    self.check_boundary(ps[0].vertices(), false, None);
                    self.timed(5, |e| e.phase5(ps))?
                }
                Step::Adjust(h) => self.timed(6, |e| e.phase6(*h))?,
                Step::Close(a) => self.timed(7, |e| e.phase7(*a))?,
            };
        }
    }

    fn timed(&mut self, phase: u8, f: impl FnOnce(&mut Self) -> PhaseResult) -> PhaseResult {
        self.phase = phase;
        self.ops = 0;
        self.metrics.phase_invocations[phase as usize - 1] += 1;
        let start = self.timing.then(Instant::now);
        let r = f(self);
        if let Some(t) = start {
            self.micros[phase as usize - 1] += t.elapsed().as_micros() as u64;
        }
        r
    }

    fn rng(&mut self) -> &mut TrialRng {
        self.lift.rng_mut()
    }

    fn spend(&mut self) -> Result<(), FailureReason> {
        self.ops += 1;
        if self.ops > self.th.rotation_budget {
            Err(FailureReason::BudgetExhausted { phase: self.phase })
        } else {
            Ok(())
        }
    }

    fn owner_of(&self, v: LiftVertex) -> u32 {
        self.owner[self.dims.id(v)]
    }

    fn on_remaining(&self, v: LiftVertex) -> bool {
        self.owner_of(v) != MAIN
    }

    /// Partition and activity invariants at a phase boundary. `main` is the
    /// current cycle or path; `exempt` is the vertex a jump just reached.
    fn check_boundary(&self, main: &[LiftVertex], closed: bool, exempt: Option<LiftVertex>) {
        let main_count = self.dims.vertex_count() - self.remaining_mass;
        assert_eq!(
            main.len(),
            main_count,
            "main object does not cover the main vertex set"
        );
        assert!(main.iter().all(|&v| self.owner_of(v) == MAIN));
        let verdict = if closed && main.len() >= 3 {
            verify_cycle(&self.lift, main)
        } else {
            verify_path(&self.lift, main)
        };
        assert!(
            verdict.ok,
            "main object invalid in phase {}: {verdict}",
            self.phase
        );
        for i in 0..self.dims.vertex_count() {
            if self.owner[i] != MAIN {
                let v = self.dims.vertex(i);
                assert!(
                    self.lift.is_active(v) || self.stray[i] || exempt == Some(v),
                    "inactive vertex {} outside the main object entering phase after {}",
                    self.dims.vertex(i),
                    self.phase
                );
            }
        }
    }

    fn absorb_cycle(&mut self, c: u32) {
        debug_assert!(self.alive[c as usize]);
        self.alive[c as usize] = false;
        self.remaining_count -= 1;
        self.remaining_mass -= self.cycles[c as usize].len();
        for &v in &self.cycles[c as usize] {
            self.owner[self.dims.id(v)] = MAIN;
        }
    }

    // ---- Phase 1 -------------------------------------------------------

    fn phase1(&mut self) -> Step {
        let cycles = self.lift.lift_h1();
        self.metrics.basic_cycles_initial = cycles.len();
        let longest = cycles.iter().map(Vec::len).max().expect("at least one cycle");
        let ties: Vec<usize> = (0..cycles.len())
            .filter(|&i| cycles[i].len() == longest)
            .collect();
        let main = *ties.choose(self.rng()).expect("non-empty");
        for (i, c) in cycles.iter().enumerate() {
            if i != main {
                for &v in c {
                    self.owner[self.dims.id(v)] = i as u32;
                }
                self.remaining_mass += c.len();
                self.remaining_count += 1;
            }
        }
        self.alive = (0..cycles.len()).map(|i| i != main).collect();
        let c = cycles[main].clone();
        self.cycles = cycles;
        Step::Closed(c)
    }

    // ---- Phase 2 -------------------------------------------------------

    fn phase2(&mut self, c: Vec<LiftVertex>) -> PhaseResult {
        if self.remaining_count == 0 {
            return Ok(Step::Closed(c));
        }
        if self.remaining_mass < self.th.small_remainder {
            self.merge_from_small_side(c)
        } else {
            self.merge_from_large_side(c)
        }
    }

    fn reveal_probe(&mut self, v: LiftVertex) -> Result<Vec<LiftVertex>, FailureReason> {
        let landed = self.lift.reveal_all_g1_neighbors(v);
        for &w in landed.iter().chain(std::iter::once(&v)) {
            if self.on_remaining(w) {
                self.stray[self.dims.id(w)] = true;
            }
        }
        for _ in &landed {
            self.spend()?;
        }
        Ok(landed)
    }

    /// Probes from vertices of one remaining cycle until an edge lands on a
    /// vertex of `c` that was clear of inactive vertices before the reveal.
    fn merge_from_small_side(&mut self, c: Vec<LiftVertex>) -> PhaseResult {
        let alive: Vec<u32> = (0..self.cycles.len() as u32)
            .filter(|&i| self.alive[i as usize])
            .collect();
        let ci = *alive.choose(self.rng()).expect("a remaining cycle");
        let mut order: Vec<usize> = (0..self.cycles[ci as usize].len()).collect();
        order.shuffle(self.rng());
        for j in order {
            let v = self.cycles[ci as usize][j];
            let landed = self.reveal_probe(v)?;
            let hit = landed
                .into_iter()
                .find(|&w| !self.on_remaining(w) && self.lift.pivot_clear(w, v));
            if let Some(w) = hit {
                let pos_w = c.iter().position(|&x| x == w).expect("main vertex on the cycle");
                let other = self.cycles[ci as usize].clone();
                let p = self.connect(&c, pos_w, &other, j);
                self.absorb_cycle(ci);
                return Ok(Step::Clone(p));
            }
        }
        Err(FailureReason::MergeExhausted)
    }

    /// Probes batches of clear, pairwise non-adjacent vertices of `c` until
    /// an edge lands on a remaining cycle.
    fn merge_from_large_side(&mut self, c: Vec<LiftVertex>) -> PhaseResult {
        loop {
            let mut order: Vec<usize> = (0..c.len()).collect();
            order.shuffle(self.rng());
            let mut probes: Vec<usize> = Vec::new();
            for i in order {
                if probes.len() >= self.th.probe_batch {
                    break;
                }
                let v = c[i];
                if self.lift.distance2_clear(v) && probes.iter().all(|&j| !self.lift.has_edge(v, c[j])) {
                    probes.push(i);
                }
            }
            if probes.is_empty() {
                return Err(FailureReason::MergeExhausted);
            }
            for i in probes {
                let landed = self.reveal_probe(c[i])?;
                if let Some(w) = landed.into_iter().find(|&w| self.on_remaining(w)) {
                    let ci = self.owner_of(w);
                    let other = self.cycles[ci as usize].clone();
                    let j = other.iter().position(|&x| x == w).expect("vertex on its cycle");
                    let p = self.connect(&c, i, &other, j);
                    self.absorb_cycle(ci);
                    return Ok(Step::Clone(p));
                }
            }
        }
    }

    /// The path through edge `{c[i], d[j]}` covering both cycles. Among the
    /// four ways to break the cycles, those leaving more active ends win;
    /// ties go to the RNG.
    fn connect(&mut self, c: &[LiftVertex], i: usize, d: &[LiftVertex], j: usize) -> Vec<LiftVertex> {
        let (lc, ld) = (c.len(), d.len());
        let mut options = Vec::with_capacity(4);
        for c_fwd in [true, false] {
            for d_fwd in [true, false] {
                let first = if c_fwd {
                    c[(i + 1) % lc]
                } else {
                    c[(i + lc - 1) % lc]
                };
                let last = if d_fwd {
                    d[(j + ld - 1) % ld]
                } else {
                    d[(j + 1) % ld]
                };
                let score = self.lift.is_active(first) as u8 + self.lift.is_active(last) as u8;
                options.push((score, c_fwd, d_fwd));
            }
        }
        let best = options.iter().map(|o| o.0).max().unwrap();
        options.retain(|o| o.0 == best);
        let &(_, c_fwd, d_fwd) = options.choose(self.rng()).unwrap();
        let mut p = Vec::with_capacity(lc + ld);
        for s in 1..=lc {
            p.push(if c_fwd {
                c[(i + s) % lc]
            } else {
                c[(i + lc * 2 - s) % lc]
            });
        }
        for s in 0..ld {
            p.push(if d_fwd {
                d[(j + s) % ld]
            } else {
                d[(j + ld - s) % ld]
            });
        }
        p
    }

    // ---- Phase 3 -------------------------------------------------------

    fn phase3(&mut self, mut path: Vec<LiftVertex>, w: LiftVertex) -> Step {
        debug_assert!(self.lift.has_edge(*path.last().unwrap(), w));
        let ci = self.owner_of(w);
        let cyc = self.cycles[ci as usize].clone();
        let l = cyc.len();
        let j = cyc.iter().position(|&x| x == w).expect("vertex on its cycle");
        let score = |e: &Self, v: LiftVertex| e.lift.distance2_clear(v) as u8 * 2 + e.lift.is_active(v) as u8;
        let fwd_end = cyc[(j + l - 1) % l];
        let bwd_end = cyc[(j + 1) % l];
        let (sf, sb) = (score(self, fwd_end), score(self, bwd_end));
        let forward = if sf != sb {
            sf > sb
        } else {
            self.rng().gen_bool(0.5)
        };
        for s in 0..l {
            path.push(if forward {
                cyc[(j + s) % l]
            } else {
                cyc[(j + l - s) % l]
            });
        }
        self.absorb_cycle(ci);
        Step::Clone(path)
    }

    // ---- Tree expansion shared by phases 4 and 5 ------------------------

    fn classify(
        &self,
        w: LiftVertex,
        start: Option<LiftVertex>,
        other: Option<&RotationTree>,
    ) -> Option<Jump> {
        if let Some(id) = other.and_then(|o| o.node_with_end(w)) {
            return Some(Jump::CloseOther(id));
        }
        if self.on_remaining(w) {
            return Some(Jump::Absorb(w));
        }
        if start == Some(w) {
            return Some(Jump::CloseStart);
        }
        None
    }

    fn scan_revealed(
        &self,
        e: LiftVertex,
        start: Option<LiftVertex>,
        other: Option<&RotationTree>,
    ) -> Option<Jump> {
        self.lift
            .revealed_neighbors(e)
            .find_map(|(_, w)| self.classify(w, start, other))
    }

    /// Expands node `id`: checks the end's revealed edges for jumps, reveals
    /// its unrevealed G₁ edges one at a time (checking after each), then adds
    /// a child for every admissible rotation. A closing edge to the tree's
    /// own start counts only when `own_start_closes`.
    fn expand(
        &mut self,
        tree: &mut RotationTree,
        id: NodeId,
        own_start_closes: bool,
        other: Option<&RotationTree>,
    ) -> Result<Option<(NodeId, Jump)>, FailureReason> {
        let start = own_start_closes.then(|| tree.start());
        let path = tree.materialize(id);
        let e = path.end();
        if let Some(j) = self.scan_revealed(e, start, other) {
            return Ok(Some((id, j)));
        }
        let pending: Vec<usize> = self
            .lift
            .g1_base_neighbors(e.base)
            .filter(|&b| self.lift.neighbor(e, b).is_none())
            .collect();
        for b in pending {
            let w = self.lift.reveal_neighbor(e, b).expect("unrevealed G1 edge");
            self.spend()?;
            if let Some(j) = self.classify(w, start, other) {
                return Ok(Some((id, j)));
            }
        }
        for i in path.rotation_candidates(&self.lift) {
            let new_end = path.vertices()[i + 1];
            if let Some(child) = tree.add_child(id, i, new_end) {
                self.metrics.rotations += 1;
                self.spend()?;
                if let Some(j) = self.scan_revealed(new_end, start, other) {
                    return Ok(Some((child, j)));
                }
            }
        }
        Ok(None)
    }

    fn single_tree_jump(&self, tree: &RotationTree, id: NodeId, jump: Jump) -> Step {
        let path = tree.materialize(id).into_vertices();
        match jump {
            Jump::Absorb(w) => Step::Absorb { path, w },
            Jump::CloseStart => Step::Closed(path),
            Jump::CloseOther(_) => unreachable!("single tree has no other half"),
        }
    }

    // ---- Phase 4 -------------------------------------------------------

    fn phase4(&mut self, p: Vec<LiftVertex>) -> PhaseResult {
        let r = self.th.clone_count;
        let w1 = p[0];
        let mut tree = RotationTree::new(RotationPath::new(p, self.dims));
        loop {
            let active = tree
                .frontier()
                .filter(|&id| self.lift.is_active(tree.end(id)))
                .count();
            if active >= r {
                break;
            }
            let Some(id) = tree.next_to_expand() else { break };
            if let Some((nid, j)) = self.expand(&mut tree, id, true, None)? {
                return Ok(self.single_tree_jump(&tree, nid, j));
            }
        }
        let mut ends: Vec<NodeId> = tree
            .frontier()
            .filter(|&id| self.lift.is_active(tree.end(id)))
            .collect();
        if ends.is_empty() {
            return Err(FailureReason::Stalled { phase: 4 });
        }
        ends.shuffle(self.rng());
        ends.truncate(r);
        let mut used: std::collections::HashSet<LiftVertex> = ends.iter().map(|&id| tree.end(id)).collect();
        used.insert(w1);
        let mut clones = Vec::with_capacity(ends.len());
        for id in ends {
            let mut t2 = RotationTree::new(tree.materialize(id).reversed());
            loop {
                let found = t2
                    .frontier()
                    .find(|&c| self.lift.is_active(t2.end(c)) && !used.contains(&t2.end(c)));
                if let Some(c) = found {
                    used.insert(t2.end(c));
                    clones.push(t2.materialize(c));
                    break;
                }
                let Some(x) = t2.next_to_expand() else { break };
                if let Some((nid, j)) = self.expand(&mut t2, x, true, None)? {
                    return Ok(self.single_tree_jump(&t2, nid, j));
                }
            }
        }
        if clones.is_empty() {
            return Err(FailureReason::Stalled { phase: 4 });
        }
        Ok(Step::Multiply(clones))
    }

    // ---- Phase 5 -------------------------------------------------------

    /// `reverse(first) ++ second`, the full path joining an end of each half.
    fn join(first: &RotationPath, second: &RotationPath) -> Vec<LiftVertex> {
        let mut v: Vec<LiftVertex> = first.vertices().iter().rev().copied().collect();
        v.extend_from_slice(second.vertices());
        v
    }

    /// Some node of `tree` whose end is active, else the root.
    fn any_active_node(&self, tree: &RotationTree) -> NodeId {
        tree.frontier()
            .find(|&id| self.lift.is_active(tree.end(id)))
            .unwrap_or(0)
    }

    fn two_tree_jump(&self, h: &Halves, side: Side, id: NodeId, jump: Jump) -> Step {
        let (own, other) = match side {
            Side::First => (&h.a, &h.b),
            Side::Second => (&h.b, &h.a),
        };
        match jump {
            Jump::CloseOther(oid) => {
                let (a, b) = match side {
                    Side::First => (id, oid),
                    Side::Second => (oid, id),
                };
                Step::Closed(Self::join(&h.a.materialize(a), &h.b.materialize(b)))
            }
            Jump::Absorb(w) => {
                let o = other.materialize(self.any_active_node(other));
                Step::Absorb {
                    path: Self::join(&o, &own.materialize(id)),
                    w,
                }
            }
            Jump::CloseStart => unreachable!("half trees do not close on their own start"),
        }
    }

    fn phase5(&mut self, paths: Vec<RotationPath>) -> PhaseResult {
        for p in paths {
            let t = p.len();
            let verts = p.into_vertices();
            if t >= 3 && self.lift.has_edge(verts[0], verts[t - 1]) {
                return Ok(Step::Closed(verts));
            }
            let i = t.div_ceil(2);
            let first: Vec<LiftVertex> = verts[..i].iter().rev().copied().collect();
            let mut h = Halves {
                a: RotationTree::new(RotationPath::new(first, self.dims)),
                b: RotationTree::new(RotationPath::new(verts[i..].to_vec(), self.dims)),
            };
            let target = self.th.endset_target.min((t.saturating_sub(1) / 2).max(1));
            loop {
                let (done_a, done_b) = (h.a.len() >= target, h.b.len() >= target);
                if done_a && done_b {
                    return Ok(Step::Adjust(Box::new(h)));
                }
                let mut progressed = false;
                if !done_a {
                    if let Some(id) = h.a.next_to_expand() {
                        progressed = true;
                        if let Some((nid, j)) = self.expand(&mut h.a, id, false, Some(&h.b))? {
                            return Ok(self.two_tree_jump(&h, Side::First, nid, j));
                        }
                    }
                }
                if !done_b {
                    if let Some(id) = h.b.next_to_expand() {
                        progressed = true;
                        if let Some((nid, j)) = self.expand(&mut h.b, id, false, Some(&h.a))? {
                            return Ok(self.two_tree_jump(&h, Side::Second, nid, j));
                        }
                    }
                }
                if !progressed {
                    // Both families are exhausted below the target.
                    let floor = self.th.adjusted_target.min(target);
                    if h.a.len() >= floor && h.b.len() >= floor {
                        return Ok(Step::Adjust(Box::new(h)));
                    }
                    break;
                }
            }
        }
        Err(FailureReason::Stalled { phase: 5 })
    }

    // ---- Phase 6 -------------------------------------------------------

    fn survivor_path(tree: &RotationTree, s: &Survivor) -> RotationPath {
        let mut p = tree.materialize(s.node);
        for &pivot in &s.pivots {
            p.rotate_unchecked(pivot);
        }
        p
    }

    /// The `k − 1` pivot sections of `path` as inclusive position ranges,
    /// the first nearest the moving end. Oriented runs are maximal stretches of
    /// at least `k` consecutive steps along `succ`; each section receives an
    /// equal share of them. `None` if there are fewer runs than sections.
    fn sections(&self, path: &RotationPath, succ: &[usize]) -> Option<Vec<(usize, usize)>> {
        let k = self.dims.k;
        let v = path.vertices();
        let mut runs = Vec::new();
        let mut start = 0;
        for j in 0..v.len() {
            let oriented = j + 1 < v.len() && succ[v[j].base] == v[j + 1].base;
            if !oriented {
                if j - start >= k {
                    runs.push((start, j));
                }
                start = j + 1;
            }
        }
        let count = k - 1;
        if runs.len() < count {
            return None;
        }
        // Runs are listed from the start; assign them from the end backwards.
        let mut out = Vec::with_capacity(count);
        let mut hi = v.len() - 1;
        let mut taken = 0;
        for s in 0..count {
            let share = (runs.len() - taken) / (count - s);
            taken += share;
            let lo = if s + 1 == count {
                0
            } else {
                runs[runs.len() - taken].0
            };
            out.push((lo, hi));
            hi = lo.saturating_sub(1);
        }
        Some(out)
    }

    /// Moves ends of `own` onto fiber `target` along alternating paths,
    /// rotating with the fixed start preserved. Returns the survivors, or a
    /// jump when an adjusting edge closes the path or reaches a basic cycle.
    fn adjust_side(
        &mut self,
        h: &Halves,
        side: Side,
        target: usize,
        other_survivors: &[Survivor],
    ) -> Result<Result<Vec<Survivor>, Step>, FailureReason> {
        let (own, other) = match side {
            Side::First => (&h.a, &h.b),
            Side::Second => (&h.b, &h.a),
        };
        let other_ends: HashMap<LiftVertex, usize> = other_survivors
            .iter()
            .enumerate()
            .map(|(i, s)| (s.end, i))
            .collect();
        let closing = |me: &RotationPath, them: &RotationPath| match side {
            Side::First => Step::Closed(Self::join(me, them)),
            Side::Second => Step::Closed(Self::join(them, me)),
        };
        let mut ids: Vec<NodeId> = own.ids().collect();
        ids.shuffle(self.rng());
        let mut survivors = Vec::new();
        for id in ids {
            if survivors.len() >= self.th.adjusted_target {
                break;
            }
            let end = own.end(id);
            if end.base == target {
                survivors.push(Survivor {
                    node: id,
                    pivots: Vec::new(),
                    end,
                });
                continue;
            }
            let mut cur = own.materialize(id);
            let v = cur.vertices();
            let positive = v
                .windows(2)
                .filter(|w| self.h1.succ[w[0].base] == w[1].base)
                .count();
            let negative = v
                .windows(2)
                .filter(|w| self.h1.pred[w[0].base] == w[1].base)
                .count();
            let orient = usize::from(negative > positive);
            let Some(route) = self.alt[orient].get(end.base, target).cloned() else {
                continue;
            };
            let succ = if orient == 0 {
                self.h1.succ.clone()
            } else {
                self.h1.pred.clone()
            };
            let sections = match self.th.pivot_gating {
                PivotGating::Sections => match self.sections(&cur, &succ) {
                    Some(s) => Some(s),
                    None => continue,
                },
                PivotGating::Monotone => None,
            };
            let mut pivots = Vec::new();
            let mut last_pivot = cur.len();
            let mut ok = true;
            for (s, (b, a)) in route.steps().enumerate() {
                let e = cur.end();
                let revealed = self.lift.neighbor(e, b).is_none();
                let w = self
                    .lift
                    .neighbor_or_reveal(e, b)
                    .expect("H2 edge of the base graph");
                if revealed {
                    self.spend()?;
                }
                if let Some(oid) = other.node_with_end(w) {
                    return Ok(Err(closing(&cur, &other.materialize(oid))));
                }
                if let Some(&si) = other_ends.get(&w) {
                    return Ok(Err(closing(
                        &cur,
                        &Self::survivor_path(other, &other_survivors[si]),
                    )));
                }
                if self.on_remaining(w) {
                    let o = other.materialize(self.any_active_node(other));
                    return Ok(Err(Step::Absorb {
                        path: Self::join(&o, &cur),
                        w,
                    }));
                }
                let Some(p) = cur.position(w) else {
                    ok = false;
                    break;
                };
                let gated = match &sections {
                    Some(q) => s < q.len() && q[s].0 <= p && p <= q[s].1,
                    None => p < last_pivot,
                };
                if !gated
                    || p + 2 > cur.len() - 1
                    || cur.vertices()[p + 1].base != a
                    || !cur.is_rotation_candidate(p, &self.lift)
                {
                    ok = false;
                    break;
                }
                cur.rotate(p, &self.lift).expect("candidate rotation");
                self.metrics.rotations += 1;
                self.spend()?;
                pivots.push(p);
                last_pivot = p;
            }
            if ok {
                debug_assert_eq!(cur.end().base, target);
                survivors.push(Survivor {
                    node: id,
                    pivots,
                    end: cur.end(),
                });
            }
        }
        Ok(Ok(survivors))
    }

    fn phase6(&mut self, h: Halves) -> PhaseResult {
        let (x, y) = self.target;
        let first = match self.adjust_side(&h, Side::First, x, &[])? {
            Ok(s) => s,
            Err(step) => return Ok(step),
        };
        let second = match self.adjust_side(&h, Side::Second, y, &first)? {
            Ok(s) => s,
            Err(step) => return Ok(step),
        };
        let need = self.th.adjusted_target;
        if first.len() < need || second.len() < need {
            return Err(FailureReason::TooFewSurvivors {
                first: first.len(),
                second: second.len(),
            });
        }
        Ok(Step::Close(Box::new(Adjusted {
            halves: h,
            first,
            second,
        })))
    }

    // ---- Phase 7 -------------------------------------------------------

    fn phase7(&mut self, adj: Adjusted) -> PhaseResult {
        let (_, y) = self.target;
        let h = &adj.halves;
        let second: HashMap<LiftVertex, usize> =
            adj.second.iter().enumerate().map(|(i, s)| (s.end, i)).collect();
        let mut order: Vec<usize> = (0..adj.first.len()).collect();
        order.shuffle(self.rng());
        for i in order {
            let s = &adj.first[i];
            let revealed = self.lift.neighbor(s.end, y).is_none();
            let w = self
                .lift
                .neighbor_or_reveal(s.end, y)
                .expect("target edge of the base graph");
            if revealed {
                self.spend()?;
            }
            if let Some(&j) = second.get(&w) {
                let a = Self::survivor_path(&h.a, s);
                let b = Self::survivor_path(&h.b, &adj.second[j]);
                return Ok(Step::Closed(Self::join(&a, &b)));
            }
            if self.on_remaining(w) {
                let a = Self::survivor_path(&h.a, s);
                let b = Self::survivor_path(&h.b, &adj.second[0]);
                return Ok(Step::Absorb {
                    path: Self::join(&b, &a),
                    w,
                });
            }
        }
        Err(FailureReason::NoClosingEdge)
    }
}
