//! Lazily revealed random n-lift.
//!
//! Every base edge `{u, v}` (stored with `u < v`) owns a partial injective map
//! from the fiber over `u` to the fiber over `v`. Entries are drawn uniformly
//! from the still-unmatched indices on the far side at the moment they are
//! first asked for, so any revelation order yields a uniform perfect matching
//! once the map is complete.
//!
//! Only revelations of G₁ = G − H₁ edges through [`LiftState::reveal_neighbor`]
//! deactivate vertices; H₁ is revealed eagerly and never counts.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::base::BaseGraph;
use crate::error::LiftError;
use crate::rng::TrialRng;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LiftVertex {
    pub base: usize,
    pub fiber: usize,
}

impl LiftVertex {
    pub fn new(base: usize, fiber: usize) -> Self {
        Self { base, fiber }
    }
}

impl std::fmt::Display for LiftVertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.base, self.fiber)
    }
}

/// Shape of a lift: `k` fibers of `n` vertices each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftDims {
    pub k: usize,
    pub n: usize,
}

impl LiftDims {
    pub fn vertex_count(&self) -> usize {
        self.k * self.n
    }

    pub fn id(&self, v: LiftVertex) -> usize {
        v.base * self.n + v.fiber
    }

    pub fn vertex(&self, id: usize) -> LiftVertex {
        LiftVertex::new(id / self.n, id % self.n)
    }

    pub fn contains(&self, v: LiftVertex) -> bool {
        v.base < self.k && v.fiber < self.n
    }
}

/// Partial bijection between two fibers, with free lists for O(1) uniform
/// sampling of unmatched partners.
#[derive(Debug, Clone)]
struct LazyMatching {
    fwd: Vec<u32>,
    inv: Vec<u32>,
    free_fwd: FreeList,
    free_inv: FreeList,
}

#[derive(Debug, Clone)]
struct FreeList {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl FreeList {
    fn full(n: usize) -> Self {
        Self {
            items: (0..n as u32).collect(),
            pos: (0..n as u32).collect(),
        }
    }

    fn remove(&mut self, x: u32) {
        let p = self.pos[x as usize];
        debug_assert_ne!(p, NONE);
        let last = *self.items.last().expect("non-empty");
        self.items.swap_remove(p as usize);
        if last != x {
            self.pos[last as usize] = p;
        }
        self.pos[x as usize] = NONE;
    }
}

impl LazyMatching {
    fn new(n: usize) -> Self {
        Self {
            fwd: vec![NONE; n],
            inv: vec![NONE; n],
            free_fwd: FreeList::full(n),
            free_inv: FreeList::full(n),
        }
    }

    fn get(&self, forward: bool, i: usize) -> Option<usize> {
        let x = if forward { self.fwd[i] } else { self.inv[i] };
        (x != NONE).then_some(x as usize)
    }

    fn draw(&mut self, forward: bool, i: usize, rng: &mut TrialRng) -> Result<usize, LiftError> {
        let far = if forward { &self.free_inv } else { &self.free_fwd };
        if far.items.is_empty() {
            return Err(LiftError::Exhausted);
        }
        let j = far.items[rng.gen_range(0..far.items.len())] as usize;
        let (a, b) = if forward { (i, j) } else { (j, i) };
        self.fwd[a] = b as u32;
        self.inv[b] = a as u32;
        self.free_fwd.remove(a as u32);
        self.free_inv.remove(b as u32);
        Ok(j)
    }

    fn is_complete(&self) -> bool {
        self.free_fwd.items.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct LiftState {
    graph: Arc<BaseGraph>,
    h1_order: Vec<usize>,
    h1_mask: Vec<bool>,
    dims: LiftDims,
    maps: Vec<LazyMatching>,
    inactive: Vec<bool>,
    inactive_count: usize,
    reveal_calls: u64,
    rng: TrialRng,
}

impl LiftState {
    /// Fresh lift with nothing revealed. `h1_order` names the cycle whose
    /// lift is revealed by [`Self::lift_h1`]; its edges never deactivate.
    pub fn new(graph: Arc<BaseGraph>, h1_order: &[usize], n: usize, rng: TrialRng) -> Self {
        assert!(n >= 1, "fiber size must be positive");
        assert_eq!(h1_order.len(), graph.k(), "H1 must visit every base vertex");
        let mut h1_mask = vec![false; graph.edge_count()];
        for i in 0..h1_order.len() {
            let (a, b) = (h1_order[i], h1_order[(i + 1) % h1_order.len()]);
            let e = graph
                .edge_index(a, b)
                .expect("H1 edges must be edges of the base graph");
            h1_mask[e] = true;
        }
        let dims = LiftDims { k: graph.k(), n };
        let maps = (0..graph.edge_count()).map(|_| LazyMatching::new(n)).collect();
        Self {
            h1_order: h1_order.to_vec(),
            h1_mask,
            dims,
            maps,
            inactive: vec![false; dims.vertex_count()],
            inactive_count: 0,
            reveal_calls: 0,
            rng,
            graph,
        }
    }

    pub fn dims(&self) -> LiftDims {
        self.dims
    }

    pub fn n(&self) -> usize {
        self.dims.n
    }

    pub fn graph(&self) -> &BaseGraph {
        &self.graph
    }

    pub fn h1_order(&self) -> &[usize] {
        &self.h1_order
    }

    pub fn is_h1_edge(&self, edge: usize) -> bool {
        self.h1_mask[edge]
    }

    pub fn rng_mut(&mut self) -> &mut TrialRng {
        &mut self.rng
    }

    /// Number of `reveal_neighbor` calls so far.
    pub fn reveal_calls(&self) -> u64 {
        self.reveal_calls
    }

    pub fn inactive_count(&self) -> usize {
        self.inactive_count
    }

    pub fn is_active(&self, v: LiftVertex) -> bool {
        !self.inactive[self.dims.id(v)]
    }

    fn slot(&self, v: LiftVertex, base_neighbor: usize) -> Option<(usize, bool)> {
        self.graph
            .edge_index(v.base, base_neighbor)
            .map(|e| (e, v.base < base_neighbor))
    }

    /// Revealed partner of `v` in the fiber over `base_neighbor`.
    pub fn neighbor(&self, v: LiftVertex, base_neighbor: usize) -> Option<LiftVertex> {
        let (e, forward) = self.slot(v, base_neighbor)?;
        self.maps[e]
            .get(forward, v.fiber)
            .map(|f| LiftVertex::new(base_neighbor, f))
    }

    /// Revealed neighbours of `v` as `(edge index, vertex)`, in base-neighbour order.
    pub fn revealed_neighbors(&self, v: LiftVertex) -> impl Iterator<Item = (usize, LiftVertex)> + '_ {
        self.graph.neighbors(v.base).iter().filter_map(move |&(b, e)| {
            self.maps[e]
                .get(v.base < b, v.fiber)
                .map(|f| (e, LiftVertex::new(b, f)))
        })
    }

    /// Is `{a, b}` an edge of the currently revealed lift?
    pub fn has_edge(&self, a: LiftVertex, b: LiftVertex) -> bool {
        self.dims.contains(a) && self.dims.contains(b) && self.neighbor(a, b.base) == Some(b)
    }

    /// Base neighbours of `base` along G₁ edges, in fixed order.
    pub fn g1_base_neighbors(&self, base: usize) -> impl Iterator<Item = usize> + '_ {
        self.graph
            .neighbors(base)
            .iter()
            .filter(|&&(_, e)| !self.h1_mask[e])
            .map(|&(b, _)| b)
    }

    /// Draws the partner of `v` across base edge `{v.base, base_neighbor}`
    /// uniformly among unmatched vertices of the far fiber and records it.
    pub fn reveal_neighbor(&mut self, v: LiftVertex, base_neighbor: usize) -> Result<LiftVertex, LiftError> {
        let (e, forward) = self
            .slot(v, base_neighbor)
            .ok_or(LiftError::NotAnEdge(v.base, base_neighbor))?;
        if self.maps[e].get(forward, v.fiber).is_some() {
            return Err(LiftError::AlreadyRevealed {
                base: v.base,
                fiber: v.fiber,
                neighbor: base_neighbor,
            });
        }
        let f = self.maps[e].draw(forward, v.fiber, &mut self.rng)?;
        let w = LiftVertex::new(base_neighbor, f);
        self.reveal_calls += 1;
        if !self.h1_mask[e] {
            self.deactivate(v);
            self.deactivate(w);
        }
        Ok(w)
    }

    /// Partner across `{v.base, base_neighbor}`, revealing it if necessary.
    pub fn neighbor_or_reveal(
        &mut self,
        v: LiftVertex,
        base_neighbor: usize,
    ) -> Result<LiftVertex, LiftError> {
        match self.neighbor(v, base_neighbor) {
            Some(w) => Ok(w),
            None => self.reveal_neighbor(v, base_neighbor),
        }
    }

    /// Reveals every not-yet-revealed G₁ edge at `v`, in base-neighbour order.
    pub fn reveal_all_g1_neighbors(&mut self, v: LiftVertex) -> Vec<LiftVertex> {
        let pending: Vec<usize> = self
            .g1_base_neighbors(v.base)
            .filter(|&b| self.neighbor(v, b).is_none())
            .collect();
        pending
            .into_iter()
            .map(|b| self.reveal_neighbor(v, b).expect("checked unrevealed"))
            .collect()
    }

    /// No inactive vertex at distance less than 2: `v` and all of its
    /// revealed neighbours are active.
    pub fn distance2_clear(&self, v: LiftVertex) -> bool {
        self.is_active(v) && self.revealed_neighbors(v).all(|(_, w)| self.is_active(w))
    }

    /// [`Self::distance2_clear`] for a rotation pivot, evaluated as it stood
    /// before the rotation edge `{pivot, end}` was revealed: the pivot has no
    /// other revealed G₁ edge and its other revealed neighbours are active.
    pub fn pivot_clear(&self, pivot: LiftVertex, end: LiftVertex) -> bool {
        self.revealed_neighbors(pivot)
            .all(|(e, w)| w == end || (self.h1_mask[e] && self.is_active(w)))
    }

    /// Records the pair `(i, j)` on base edge `{u, v}` (fiber over `u` to
    /// fiber over `v`) without drawing. Bypasses the random model; meant for
    /// hand-built test fixtures only.
    #[doc(hidden)]
    pub fn force_pair(&mut self, u: usize, v: usize, i: usize, j: usize) -> Result<(), LiftError> {
        let e = self.graph.edge_index(u, v).ok_or(LiftError::NotAnEdge(u, v))?;
        let (a, b) = if u < v { (i, j) } else { (j, i) };
        let map = &mut self.maps[e];
        if map.fwd[a] != NONE || map.inv[b] != NONE {
            return Err(LiftError::AlreadyRevealed {
                base: u,
                fiber: i,
                neighbor: v,
            });
        }
        map.fwd[a] = b as u32;
        map.inv[b] = a as u32;
        map.free_fwd.remove(a as u32);
        map.free_inv.remove(b as u32);
        Ok(())
    }

    fn deactivate(&mut self, v: LiftVertex) {
        let id = self.dims.id(v);
        if !self.inactive[id] {
            self.inactive[id] = true;
            self.inactive_count += 1;
        }
    }

    /// Completes the matching on base edge `{u, v}` uniformly over the
    /// completions of what is already revealed. Does not deactivate.
    pub fn reveal_full_edge(&mut self, u: usize, v: usize) -> Result<(), LiftError> {
        let e = self.graph.edge_index(u, v).ok_or(LiftError::NotAnEdge(u, v))?;
        let map = &mut self.maps[e];
        while let Some(&i) = map.free_fwd.items.first() {
            map.draw(true, i as usize, &mut self.rng)?;
        }
        Ok(())
    }

    pub fn reveal_everything(&mut self) {
        let edges = self.graph.edges().to_vec();
        for (u, v) in edges {
            self.reveal_full_edge(u, v).expect("base edge");
        }
    }

    pub fn is_edge_complete(&self, u: usize, v: usize) -> bool {
        self.graph
            .edge_index(u, v)
            .is_some_and(|e| self.maps[e].is_complete())
    }

    /// The full bijection on `{u, v}` as `fiber over u -> fiber over v`, if complete.
    pub fn matching(&self, u: usize, v: usize) -> Option<Vec<usize>> {
        (0..self.n())
            .map(|i| self.neighbor(LiftVertex::new(u, i), v).map(|w| w.fiber))
            .collect()
    }

    /// Reveals H₁'s lift and returns its cycles. Each cycle starts at the
    /// smallest fiber index over `h1[0]` it contains and walks fibers in H₁
    /// order, so its length is a multiple of `k`.
    pub fn lift_h1(&mut self) -> Vec<Vec<LiftVertex>> {
        let h1 = self.h1_order.clone();
        let k = h1.len();
        for i in 0..k {
            self.reveal_full_edge(h1[i], h1[(i + 1) % k]).expect("H1 edge");
        }
        let n = self.n();
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = LiftVertex::new(h1[0], start);
            loop {
                seen[cur.fiber] = true;
                for j in 0..k {
                    cycle.push(cur);
                    cur = self.neighbor(cur, h1[(j + 1) % k]).expect("H1 revealed");
                }
                if cur.fiber == start {
                    break;
                }
            }
            cycles.push(cycle);
        }
        cycles
    }

    /// `σ_{h_k h_1} ∘ … ∘ σ_{h_1 h_2}` on the fiber over `h1[0]`; needs H₁ revealed.
    pub fn h1_composed_permutation(&self) -> Option<Vec<usize>> {
        let h1 = &self.h1_order;
        let k = h1.len();
        let mut perm: Vec<usize> = (0..self.n()).collect();
        for j in 0..k {
            let step = self.matching(h1[j], h1[(j + 1) % k])?;
            for p in perm.iter_mut() {
                *p = step[*p];
            }
        }
        Some(perm)
    }

    /// All revealed lift edges, each once, ordered by endpoint.
    pub fn revealed_edges(&self) -> Vec<(LiftVertex, LiftVertex)> {
        let mut out = Vec::new();
        for &(u, v) in self.graph.edges() {
            for i in 0..self.n() {
                if let Some(w) = self.neighbor(LiftVertex::new(u, i), v) {
                    out.push((LiftVertex::new(u, i), w));
                }
            }
        }
        out
    }

    /// Edge list with one `u i v j` line per revealed edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# lift k={} n={}\n", self.dims.k, self.dims.n);
        for (a, b) in self.revealed_edges() {
            let _ = writeln!(out, "{} {} {} {}", a.base, a.fiber, b.base, b.fiber);
        }
        out
    }

    /// Graphviz rendering; H₁ lifts drawn bold.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph lift {\n  node [shape=circle, fontsize=9];\n");
        for (a, b) in self.revealed_edges() {
            let e = self.graph.edge_index(a.base, b.base).expect("lift edge");
            let style = if self.h1_mask[e] { " [style=bold]" } else { "" };
            let _ = writeln!(out, "  \"{a}\" -- \"{b}\"{style};");
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::fixtures;
    use crate::rng::rng_from_seed;

    fn k7_lift(n: usize, seed: u64) -> LiftState {
        let inst = fixtures::k7();
        LiftState::new(inst.graph().clone(), inst.h1_order(), n, rng_from_seed(seed))
    }

    #[test]
    fn n1_reveals_unique_vertex() {
        let mut lift = k7_lift(1, 0);
        let w = lift.reveal_neighbor(LiftVertex::new(0, 0), 3).unwrap();
        assert_eq!(w, LiftVertex::new(3, 0));
    }

    #[test]
    fn second_reveal_is_an_error() {
        let mut lift = k7_lift(5, 0);
        let v = LiftVertex::new(0, 2);
        let w = lift.reveal_neighbor(v, 3).unwrap();
        assert!(matches!(
            lift.reveal_neighbor(v, 3),
            Err(LiftError::AlreadyRevealed { .. })
        ));
        // The far side also sees the edge.
        assert!(lift.reveal_neighbor(w, 0).is_err());
        assert_eq!(lift.neighbor(w, 0), Some(v));
        assert!(matches!(
            lift.reveal_neighbor(v, 0),
            Err(LiftError::NotAnEdge(0, 0))
        ));
    }

    #[test]
    fn g1_reveals_deactivate_both_ends_h1_does_not() {
        let mut lift = k7_lift(10, 1);
        lift.lift_h1();
        assert_eq!(lift.inactive_count(), 0);
        let v = LiftVertex::new(0, 0);
        assert!(lift.is_active(v));
        let w = lift.reveal_neighbor(v, 3).unwrap();
        assert!(!lift.is_active(v) && !lift.is_active(w));
        assert_eq!(lift.inactive_count(), 2);
    }

    #[test]
    fn forced_completion() {
        let inst = fixtures::k7();
        // Find a seed where (0 -> 1) is drawn on edge {0, 3}, n = 2.
        for seed in 0..100 {
            let mut lift = LiftState::new(inst.graph().clone(), inst.h1_order(), 2, rng_from_seed(seed));
            if lift.reveal_neighbor(LiftVertex::new(0, 0), 3).unwrap().fiber == 1 {
                lift.reveal_full_edge(0, 3).unwrap();
                assert_eq!(lift.matching(0, 3), Some(vec![1, 0]));
                return;
            }
        }
        panic!("no seed drew the swap");
    }

    #[test]
    fn identity_h1_maps_give_n_cycles_of_length_k() {
        let mut ident = k7_lift(4, 0);
        for i in 0..7 {
            for f in 0..4 {
                ident.force_pair(i, (i + 1) % 7, f, f).unwrap();
            }
        }
        let cycles = ident.lift_h1();
        assert_eq!(cycles.len(), 4);
        assert!(cycles.iter().all(|c| c.len() == 7));

        let mut lift = k7_lift(4, 0);
        let cycles = lift.lift_h1();
        let total: usize = cycles.iter().map(Vec::len).sum();
        assert_eq!(total, 28);
        assert!(cycles.iter().all(|c| c.len() % 7 == 0));
        for c in &cycles {
            for (j, v) in c.iter().enumerate() {
                assert_eq!(v.base, j % 7);
            }
        }
        let mut one = k7_lift(1, 0);
        let c = one.lift_h1();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].len(), 7);
    }

    #[test]
    fn distance_and_activity_queries() {
        let mut lift = k7_lift(20, 4);
        lift.lift_h1();
        let v = LiftVertex::new(2, 5);
        assert!(lift.distance2_clear(v));
        let nb = lift.neighbor(v, 3).unwrap();
        lift.reveal_neighbor(nb, 5).unwrap();
        assert!(lift.is_active(v));
        assert!(!lift.distance2_clear(v));
    }

    #[test]
    fn dumps_list_every_revealed_edge() {
        let mut lift = k7_lift(3, 2);
        lift.reveal_everything();
        let text = lift.to_edge_list();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 21 * 3);
        assert!(lift.to_dot().contains("style=bold"));
    }
}
