//! Base graph `G` with two distinguished edge-disjoint Hamilton cycles.
//!
//! Vertices are `0..k`. Edges are stored once, as `(u, v)` with `u < v`, and
//! indexed in lexicographic order; that index is what the lift sampler keys
//! its matchings on.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::StructuralError;

/// Minimum base degree the search is guaranteed to need.
pub const REQUIRED_MIN_DEGREE: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseGraph {
    k: usize,
    edges: Vec<(usize, usize)>,
    index: Vec<Option<u32>>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl BaseGraph {
    pub fn new(k: usize, edges: &[(usize, usize)]) -> Result<Self, StructuralError> {
        if k == 0 {
            return Err(StructuralError::EmptyGraph);
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= k {
                    return Err(StructuralError::VertexOutOfRange { vertex: w, k });
                }
            }
            if u == v {
                return Err(StructuralError::SelfLoop(u));
            }
            let e = (u.min(v), u.max(v));
            if !set.insert(e) {
                return Err(StructuralError::DuplicateEdge(e.0, e.1));
            }
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut index = vec![None; k * k];
        let mut adj = vec![Vec::new(); k];
        for (i, &(u, v)) in edges.iter().enumerate() {
            index[u * k + v] = Some(i as u32);
            index[v * k + u] = Some(i as u32);
            adj[u].push((v, i));
            adj[v].push((u, i));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Self { k, edges, index, adj })
    }

    /// The cycle `order[0] order[1] ... order[k-1] order[0]` as a graph.
    pub fn cycle(order: &[usize]) -> Result<Self, StructuralError> {
        Self::new(order.len(), &cycle_edges(order))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.k || v >= self.k {
            return None;
        }
        self.index[u * self.k + v].map(|i| i as usize)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_index(u, v).is_some()
    }

    /// `(neighbor, edge index)` pairs sorted by neighbor.
    pub fn neighbors(&self, u: usize) -> &[(usize, usize)] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Two-colouring by BFS over every component.
    pub fn is_bipartite(&self) -> bool {
        let mut side = vec![u8::MAX; self.k];
        let mut queue = VecDeque::new();
        for s in 0..self.k {
            if side[s] != u8::MAX {
                continue;
            }
            side[s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adj[u] {
                    if side[v] == u8::MAX {
                        side[v] = side[u] ^ 1;
                        queue.push_back(v);
                    } else if side[v] == side[u] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Normalised edges `(min, max)` of the closed walk through `order`.
pub fn cycle_edges(order: &[usize]) -> Vec<(usize, usize)> {
    let k = order.len();
    (0..k)
        .map(|i| {
            let (a, b) = (order[i], order[(i + 1) % k]);
            (a.min(b), a.max(b))
        })
        .collect()
}

fn is_permutation(order: &[usize], k: usize) -> bool {
    if order.len() != k {
        return false;
    }
    let mut seen = vec![false; k];
    for &v in order {
        if v >= k || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// H₁ oriented along `h1_order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedH1 {
    pub succ: Vec<usize>,
    pub pred: Vec<usize>,
}

impl DirectedH1 {
    pub fn from_order(order: &[usize]) -> Self {
        let k = order.len();
        let mut succ = vec![0; k];
        let mut pred = vec![0; k];
        for i in 0..k {
            let (a, b) = (order[i], order[(i + 1) % k]);
            succ[a] = b;
            pred[b] = a;
        }
        Self { succ, pred }
    }

    /// The same cycle traversed the other way round.
    pub fn reversed(&self) -> Self {
        Self {
            succ: self.pred.clone(),
            pred: self.succ.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub min_degree: usize,
    pub required_min_degree: usize,
    pub min_degree_ok: bool,
    /// H₁ and H₂ are Hamilton cycles of G and share no edge.
    pub hamilton_cycles_ok: bool,
    pub hamilton_detail: Option<String>,
    /// H₁ ∪ H₂ is not bipartite.
    pub union_non_bipartite: bool,
    pub passed: bool,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let flag = |b: bool| if b { "PASS" } else { "FAIL" };
        writeln!(
            f,
            "min degree >= {}: {} (observed {})",
            self.required_min_degree,
            flag(self.min_degree_ok),
            self.min_degree
        )?;
        write!(
            f,
            "edge-disjoint Hamilton cycles: {}",
            flag(self.hamilton_cycles_ok)
        )?;
        if let Some(d) = &self.hamilton_detail {
            write!(f, " ({d})")?;
        }
        writeln!(f)?;
        writeln!(f, "union non-bipartite: {}", flag(self.union_non_bipartite))?;
        write!(f, "overall: {}", flag(self.passed))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseInstance {
    graph: Arc<BaseGraph>,
    h1: Vec<usize>,
    h2: Vec<usize>,
}

impl BaseInstance {
    /// Builds an instance, rotating `h2` so that it starts at `h1[0]`.
    pub fn new(
        k: usize,
        edges: &[(usize, usize)],
        h1: Vec<usize>,
        h2: Vec<usize>,
    ) -> Result<Self, StructuralError> {
        let graph = BaseGraph::new(k, edges)?;
        if !is_permutation(&h1, k) {
            return Err(StructuralError::NotPermutation { name: "h1", k });
        }
        if !is_permutation(&h2, k) {
            return Err(StructuralError::NotPermutation { name: "h2", k });
        }
        let start = h2.iter().position(|&v| v == h1[0]).unwrap_or(0);
        let mut h2 = h2;
        h2.rotate_left(start);
        Ok(Self {
            graph: Arc::new(graph),
            h1,
            h2,
        })
    }

    /// Parses the line-oriented instance format:
    ///
    /// ```text
    /// # comment
    /// k 5
    /// edges
    /// 0 1
    /// ...
    /// h1 0 1 2 3 4
    /// h2 0 2 4 1 3
    /// ```
    pub fn parse(text: &str) -> Result<Self, StructuralError> {
        let mut k = None;
        let mut edges = Vec::new();
        let mut in_edges = false;
        let mut saw_edges = false;
        let mut h1 = None;
        let mut h2 = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| StructuralError::Parse {
                line: lineno + 1,
                msg,
            };
            let mut tokens = line.split_whitespace();
            let head = tokens.next().unwrap_or_default();
            let ints = |tokens: std::str::SplitWhitespace<'_>| {
                tokens
                    .map(|t| t.parse::<usize>().map_err(|e| err(format!("`{t}`: {e}"))))
                    .collect::<Result<Vec<_>, _>>()
            };
            match head {
                "k" => {
                    in_edges = false;
                    let v = ints(tokens)?;
                    if v.len() != 1 {
                        return Err(err("expected `k <int>`".into()));
                    }
                    k = Some(v[0]);
                }
                "edges" => {
                    in_edges = true;
                    saw_edges = true;
                }
                "h1" | "h2" => {
                    in_edges = false;
                    let v = ints(tokens)?;
                    if head == "h1" {
                        h1 = Some(v);
                    } else {
                        h2 = Some(v);
                    }
                }
                _ if in_edges => {
                    let v = ints(line.split_whitespace())?;
                    if v.len() != 2 {
                        return Err(err("expected `u v`".into()));
                    }
                    edges.push((v[0], v[1]));
                }
                other => return Err(err(format!("unexpected `{other}`"))),
            }
        }
        let k = k.ok_or(StructuralError::Missing("k"))?;
        if !saw_edges {
            return Err(StructuralError::Missing("edges"));
        }
        let h1 = h1.ok_or(StructuralError::Missing("h1"))?;
        let h2 = h2.ok_or(StructuralError::Missing("h2"))?;
        Self::new(k, &edges, h1, h2)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "k {}", self.k());
        out.push_str("edges\n");
        for &(u, v) in self.graph.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        let join = |o: &[usize]| o.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "h1 {}", join(&self.h1));
        let _ = writeln!(out, "h2 {}", join(&self.h2));
        out
    }

    pub fn k(&self) -> usize {
        self.graph.k()
    }

    pub fn graph(&self) -> &Arc<BaseGraph> {
        &self.graph
    }

    pub fn h1_order(&self) -> &[usize] {
        &self.h1
    }

    pub fn h2_order(&self) -> &[usize] {
        &self.h2
    }

    pub fn directed_h1(&self) -> DirectedH1 {
        DirectedH1::from_order(&self.h1)
    }

    /// `true` for base edges of H₁.
    pub fn h1_mask(&self) -> Vec<bool> {
        self.cycle_mask(&self.h1)
    }

    pub fn h2_mask(&self) -> Vec<bool> {
        self.cycle_mask(&self.h2)
    }

    fn cycle_mask(&self, order: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.graph.edge_count()];
        for (u, v) in cycle_edges(order) {
            if let Some(i) = self.graph.edge_index(u, v) {
                mask[i] = true;
            }
        }
        mask
    }

    /// Checks the three hypotheses independently; the minimum-degree
    /// threshold is a parameter so bases below 5 can be studied on purpose.
    pub fn validate(&self, required_min_degree: usize) -> ValidationReport {
        let min_degree = self.graph.min_degree();
        let min_degree_ok = min_degree >= required_min_degree;
        let hamilton_detail = self.hamilton_problem();
        let hamilton_cycles_ok = hamilton_detail.is_none();
        let union = self.union_subgraph();
        let union_non_bipartite = !union.is_bipartite();
        ValidationReport {
            min_degree,
            required_min_degree,
            min_degree_ok,
            hamilton_cycles_ok,
            hamilton_detail,
            union_non_bipartite,
            passed: min_degree_ok && hamilton_cycles_ok && union_non_bipartite,
        }
    }

    fn union_edges(&self) -> Vec<(usize, usize)> {
        let mut e = cycle_edges(&self.h1);
        e.extend(cycle_edges(&self.h2));
        e
    }

    /// First reason H₁, H₂ fail to be edge-disjoint Hamilton cycles of G.
    pub fn hamilton_problem(&self) -> Option<String> {
        if self.k() < 3 {
            return Some("k < 3 admits no Hamilton cycle".into());
        }
        for (name, order) in [("h1", &self.h1), ("h2", &self.h2)] {
            for (u, v) in cycle_edges(order) {
                if !self.graph.has_edge(u, v) {
                    return Some(format!("{name} uses {{{u}, {v}}} which is not an edge"));
                }
            }
        }
        let a: BTreeSet<_> = cycle_edges(&self.h1).into_iter().collect();
        let b: BTreeSet<_> = cycle_edges(&self.h2).into_iter().collect();
        if a.len() != self.k() || b.len() != self.k() {
            return Some("cycle repeats an edge".into());
        }
        if let Some(&(u, v)) = a.intersection(&b).next() {
            return Some(format!("h1 and h2 share edge {{{u}, {v}}}"));
        }
        None
    }

    /// `H = H₁ ∪ H₂`. Only meaningful once the cycles are edge-disjoint.
    pub fn union_subgraph(&self) -> BaseGraph {
        let set: BTreeSet<_> = self.union_edges().into_iter().collect();
        BaseGraph::new(self.k(), &set.into_iter().collect::<Vec<_>>()).expect("cycle edges are in range")
    }

    /// `G₁ = G − H₁`.
    pub fn residual_graph(&self) -> BaseGraph {
        let h1: BTreeSet<_> = cycle_edges(&self.h1).into_iter().collect();
        let rest: Vec<_> = self
            .graph
            .edges()
            .iter()
            .copied()
            .filter(|e| !h1.contains(e))
            .collect();
        BaseGraph::new(self.k(), &rest).expect("subset of a valid edge set")
    }

    /// Target edge for the adjusting phase: the lexicographically first edge
    /// outside H₁ ∪ H₂, or the first H₂ edge when G = H₁ ∪ H₂. The flag is
    /// `true` when the fallback was used.
    pub fn adjusting_target(&self) -> ((usize, usize), bool) {
        let h1 = self.h1_mask();
        let h2 = self.h2_mask();
        let edges = self.graph.edges();
        if let Some(i) = (0..edges.len()).find(|&i| !h1[i] && !h2[i]) {
            return (edges[i], false);
        }
        let i = (0..edges.len()).find(|&i| h2[i]).expect("H2 has k edges");
        (edges[i], true)
    }
}

/// Random instance on `k` vertices: two random edge-disjoint Hamilton cycles
/// plus random chords until every degree reaches `min_degree` (or the graph
/// is complete). The union may be bipartite when `k` is even; callers that
/// need a valid instance check [`BaseInstance::validate`].
pub fn random_instance<R: Rng + ?Sized>(k: usize, min_degree: usize, rng: &mut R) -> BaseInstance {
    assert!(k >= 5, "two edge-disjoint Hamilton cycles need k >= 5");
    let mut h1: Vec<usize> = (0..k).collect();
    h1.shuffle(rng);
    let e1: BTreeSet<_> = cycle_edges(&h1).into_iter().collect();
    let h2 = loop {
        let mut rest: Vec<usize> = h1[1..].to_vec();
        rest.shuffle(rng);
        let mut h2 = vec![h1[0]];
        h2.extend(rest);
        if cycle_edges(&h2).iter().all(|e| !e1.contains(e)) {
            break h2;
        }
    };
    let mut edges: BTreeSet<_> = e1.clone();
    edges.extend(cycle_edges(&h2));
    let mut degree = vec![0usize; k];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let target = min_degree.min(k - 1);
    loop {
        let low: Vec<usize> = (0..k).filter(|&v| degree[v] < target).collect();
        if low.is_empty() {
            break;
        }
        let u = low[rng.gen_range(0..low.len())];
        let candidates: Vec<usize> = (0..k)
            .filter(|&v| v != u && !edges.contains(&(u.min(v), u.max(v))))
            .collect();
        let v = candidates[rng.gen_range(0..candidates.len())];
        edges.insert((u.min(v), u.max(v)));
        degree[u] += 1;
        degree[v] += 1;
    }
    let edges: Vec<_> = edges.into_iter().collect();
    BaseInstance::new(k, &edges, h1, h2).expect("generated instance is well-formed")
}

/// Bundled instances.
pub mod fixtures {
    use super::BaseInstance;

    pub const K5: &str = include_str!("../fixtures/k5.txt");
    pub const K7: &str = include_str!("../fixtures/k7.txt");
    pub const CIRCULANT9: &str = include_str!("../fixtures/circulant9.txt");

    pub fn k5() -> BaseInstance {
        BaseInstance::parse(K5).expect("bundled fixture")
    }

    pub fn k7() -> BaseInstance {
        BaseInstance::parse(K7).expect("bundled fixture")
    }

    pub fn circulant9() -> BaseInstance {
        BaseInstance::parse(CIRCULANT9).expect("bundled fixture")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn complete(k: usize) -> Vec<(usize, usize)> {
        (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v))).collect()
    }

    #[test]
    fn k7_passes_all_three() {
        let r = fixtures::k7().validate(REQUIRED_MIN_DEGREE);
        assert_eq!(r.min_degree, 6);
        assert!(r.min_degree_ok && r.hamilton_cycles_ok && r.union_non_bipartite && r.passed);
    }

    #[test]
    fn k5_fails_only_min_degree() {
        let r = fixtures::k5().validate(REQUIRED_MIN_DEGREE);
        assert!(!r.min_degree_ok);
        assert!(r.hamilton_cycles_ok);
        assert!(r.union_non_bipartite);
        assert!(!r.passed);
        assert!(fixtures::k5().validate(4).passed);
    }

    #[test]
    fn c6_as_both_cycles_is_not_edge_disjoint() {
        let order: Vec<usize> = (0..6).collect();
        let inst = BaseInstance::new(6, &cycle_edges(&order), order.clone(), order).unwrap();
        let r = inst.validate(REQUIRED_MIN_DEGREE);
        assert!(!r.hamilton_cycles_ok);
        assert!(r.hamilton_detail.unwrap().contains("share"));
        assert!(!r.passed);
    }

    #[test]
    fn circulant_fixture_is_valid() {
        assert!(fixtures::circulant9().validate(REQUIRED_MIN_DEGREE).passed);
    }

    #[test]
    fn structural_errors_are_distinct() {
        assert!(matches!(
            BaseInstance::new(3, &[(0, 3)], vec![0, 1, 2], vec![0, 2, 1]),
            Err(StructuralError::VertexOutOfRange { .. })
        ));
        assert!(matches!(
            BaseInstance::new(3, &[(0, 1)], vec![0, 1, 1], vec![0, 2, 1]),
            Err(StructuralError::NotPermutation { name: "h1", .. })
        ));
        assert!(matches!(
            BaseInstance::new(3, &[(0, 1), (1, 0)], vec![0, 1, 2], vec![0, 2, 1]),
            Err(StructuralError::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            BaseInstance::parse("k 3\nh1 0 1 2\nh2 0 1 2\n"),
            Err(StructuralError::Missing("edges"))
        ));
        assert!(matches!(
            BaseInstance::parse("k x\n"),
            Err(StructuralError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn h2_is_rotated_to_start_at_h1_start() {
        let inst = BaseInstance::new(5, &complete(5), vec![2, 3, 4, 0, 1], vec![0, 2, 4, 1, 3]).unwrap();
        assert_eq!(inst.h2_order()[0], 2);
        assert_eq!(inst.h2_order(), &[2, 4, 1, 3, 0]);
    }

    #[test]
    fn parse_roundtrip() {
        let inst = fixtures::circulant9();
        assert_eq!(BaseInstance::parse(&inst.to_text()).unwrap(), inst);
    }

    #[test]
    fn union_and_residual() {
        let k5 = fixtures::k5();
        assert_eq!(k5.union_subgraph().edge_count(), 10);
        let res = k5.residual_graph();
        assert_eq!(res.edges(), BaseGraph::cycle(k5.h2_order()).unwrap().edges());

        let k7 = fixtures::k7();
        let u = k7.union_subgraph();
        assert_eq!(u.edge_count(), 14);
        assert!((0..7).all(|v| u.degree(v) == 4));
        let r = k7.residual_graph();
        assert!((0..7).all(|v| r.degree(v) == 4));

        // G = H1 ∪ H2 exactly: residual is H2.
        let union_only =
            BaseInstance::new(7, u.edges(), k7.h1_order().to_vec(), k7.h2_order().to_vec()).unwrap();
        assert_eq!(
            union_only.residual_graph().edges(),
            BaseGraph::cycle(k7.h2_order()).unwrap().edges()
        );
    }

    #[test]
    fn adjusting_target_prefers_edges_outside_both_cycles() {
        assert_eq!(fixtures::k7().adjusting_target(), ((0, 3), false));
        assert_eq!(fixtures::k5().adjusting_target(), ((0, 2), true));
    }

    #[test]
    fn directed_h1_is_a_single_cycle() {
        let d = fixtures::circulant9().directed_h1();
        let mut v = d.succ[0];
        let mut steps = 1;
        while v != 0 {
            v = d.succ[v];
            steps += 1;
        }
        assert_eq!(steps, 9);
        assert!((0..9).all(|u| d.pred[d.succ[u]] == u));
    }

    #[test]
    fn random_instances_meet_degree_target() {
        let mut rng = rng_from_seed(3);
        for k in 6..=11 {
            let inst = random_instance(k, 5, &mut rng);
            let r = inst.validate(5);
            assert!(r.min_degree_ok && r.hamilton_cycles_ok, "{r}");
        }
    }
}
