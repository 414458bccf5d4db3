//! Breadth-first family of Pósa rotations of one root path with a fixed start.
//!
//! Each node stores only its parent and the pivot of the rotation that
//! produced it; paths are rebuilt by replaying the pivots from the root.
//! Ends are deduplicated: a vertex is recorded as an end at most once.

use std::collections::{HashMap, VecDeque};

use crate::lift::LiftVertex;
use crate::rotation::RotationPath;

pub type NodeId = u32;

#[derive(Debug, Clone)]
struct Node {
    parent: Option<NodeId>,
    pivot: u32,
    end: LiftVertex,
    expanded: bool,
}

#[derive(Debug, Clone)]
pub struct RotationTree {
    root: RotationPath,
    nodes: Vec<Node>,
    by_end: HashMap<LiftVertex, NodeId>,
    frontier: VecDeque<NodeId>,
}

impl RotationTree {
    pub fn new(root: RotationPath) -> Self {
        let end = root.end();
        Self {
            nodes: vec![Node {
                parent: None,
                pivot: 0,
                end,
                expanded: false,
            }],
            by_end: HashMap::from([(end, 0)]),
            frontier: VecDeque::from([0]),
            root,
        }
    }

    pub fn root(&self) -> &RotationPath {
        &self.root
    }

    pub fn start(&self) -> LiftVertex {
        self.root.start()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn end(&self, id: NodeId) -> LiftVertex {
        self.nodes[id as usize].end
    }

    pub fn node_with_end(&self, v: LiftVertex) -> Option<NodeId> {
        self.by_end.get(&v).copied()
    }

    pub fn is_expanded(&self, id: NodeId) -> bool {
        self.nodes[id as usize].expanded
    }

    /// Oldest unexpanded node, marked expanded.
    pub fn next_to_expand(&mut self) -> Option<NodeId> {
        let id = self.frontier.pop_front()?;
        self.nodes[id as usize].expanded = true;
        Some(id)
    }

    pub fn has_frontier(&self) -> bool {
        !self.frontier.is_empty()
    }

    /// Unexpanded nodes in discovery order.
    pub fn frontier(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.frontier.iter().copied()
    }

    /// All node ids in discovery order.
    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        0..self.nodes.len() as NodeId
    }

    /// Records the rotation of `parent`'s path at `pivot`, whose new end is
    /// `end`. Returns `None` if `end` is already known.
    pub fn add_child(&mut self, parent: NodeId, pivot: usize, end: LiftVertex) -> Option<NodeId> {
        if self.by_end.contains_key(&end) {
            return None;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(Node {
            parent: Some(parent),
            pivot: pivot as u32,
            end,
            expanded: false,
        });
        self.by_end.insert(end, id);
        self.frontier.push_back(id);
        Some(id)
    }

    /// Pivots from the root down to `id`.
    pub fn history(&self, id: NodeId) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut cur = id;
        while let Some(p) = self.nodes[cur as usize].parent {
            pivots.push(self.nodes[cur as usize].pivot as usize);
            cur = p;
        }
        pivots.reverse();
        pivots
    }

    /// The path of node `id`, rebuilt by replaying its rotation history.
    pub fn materialize(&self, id: NodeId) -> RotationPath {
        let mut path = self.root.clone();
        for pivot in self.history(id) {
            path.rotate_unchecked(pivot);
        }
        debug_assert_eq!(path.end(), self.end(id));
        path
    }
}
