//! Pósa rotations over paths of lift vertices.
//!
//! A path `v₀ … v_m` with a revealed chord `{v_m, v_i}`, `1 ≤ i ≤ m−2`, turns
//! into `v₀ … v_i v_m v_{m−1} … v_{i+1}`: same vertex set, start preserved,
//! new end `v_{i+1}`. Paths only read the lift.

use std::fmt;

use crate::error::RotationError;
use crate::lift::{LiftDims, LiftState, LiftVertex};

const ABSENT: u32 = u32::MAX;

#[derive(Clone, PartialEq, Eq)]
pub struct RotationPath {
    verts: Vec<LiftVertex>,
    pos: Vec<u32>,
    dims: LiftDims,
}

impl RotationPath {
    /// Panics if a vertex repeats or lies outside `dims`.
    pub fn new(verts: Vec<LiftVertex>, dims: LiftDims) -> Self {
        let mut pos = vec![ABSENT; dims.vertex_count()];
        for (i, &v) in verts.iter().enumerate() {
            assert!(dims.contains(v), "vertex {v} outside the lift");
            let slot = &mut pos[dims.id(v)];
            assert_eq!(*slot, ABSENT, "vertex {v} repeated in path");
            *slot = i as u32;
        }
        Self { verts, pos, dims }
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn vertices(&self) -> &[LiftVertex] {
        &self.verts
    }

    pub fn into_vertices(self) -> Vec<LiftVertex> {
        self.verts
    }

    pub fn dims(&self) -> LiftDims {
        self.dims
    }

    pub fn start(&self) -> LiftVertex {
        self.verts[0]
    }

    pub fn end(&self) -> LiftVertex {
        *self.verts.last().expect("non-empty path")
    }

    pub fn position(&self, v: LiftVertex) -> Option<usize> {
        if !self.dims.contains(v) {
            return None;
        }
        let p = self.pos[self.dims.id(v)];
        (p != ABSENT).then_some(p as usize)
    }

    pub fn contains(&self, v: LiftVertex) -> bool {
        self.position(v).is_some()
    }

    fn reindex(&mut self, from: usize) {
        for i in from..self.verts.len() {
            self.pos[self.dims.id(self.verts[i])] = i as u32;
        }
    }

    /// Rotation with pivot at position `i`, preserving the start.
    pub fn rotate(&mut self, i: usize, lift: &LiftState) -> Result<(), RotationError> {
        let m = self.verts.len().saturating_sub(1);
        if i < 1 || i + 2 > m {
            return Err(RotationError::PivotOutOfRange {
                pivot: i,
                max: m as isize - 2,
                len: self.verts.len(),
            });
        }
        if !lift.has_edge(self.verts[m], self.verts[i]) {
            return Err(RotationError::EdgeNotRevealed);
        }
        self.verts[i + 1..].reverse();
        self.reindex(i + 1);
        Ok(())
    }

    /// Rotation replayed from a stored history; the chord was checked when the
    /// history was recorded.
    pub(crate) fn rotate_unchecked(&mut self, i: usize) {
        self.verts[i + 1..].reverse();
        self.reindex(i + 1);
    }

    pub fn reverse(&mut self) {
        self.verts.reverse();
        self.reindex(0);
    }

    pub fn reversed(mut self) -> Self {
        self.reverse();
        self
    }

    /// Would a rotation at pivot position `i` be accepted by
    /// [`Self::rotation_candidates`]?
    pub fn is_rotation_candidate(&self, i: usize, lift: &LiftState) -> bool {
        let m = self.verts.len().saturating_sub(1);
        if i < 1 || i + 2 > m {
            return false;
        }
        let (end, pivot) = (self.verts[m], self.verts[i]);
        lift.has_edge(end, pivot) && lift.is_active(self.verts[i + 1]) && lift.pivot_clear(pivot, end)
    }

    /// Pivot positions whose chord to the end is revealed, whose rotation
    /// leaves an active new end, and whose pivot is clear of inactive
    /// vertices. Ascending order.
    pub fn rotation_candidates(&self, lift: &LiftState) -> Vec<usize> {
        if self.verts.len() < 4 {
            return Vec::new();
        }
        let mut out: Vec<usize> = lift
            .revealed_neighbors(self.end())
            .filter_map(|(_, w)| self.position(w))
            .filter(|&i| self.is_rotation_candidate(i, lift))
            .collect();
        out.sort_unstable();
        out
    }

    /// The path's vertices as a cycle, if `{v₀, v_m}` is revealed.
    pub fn close_cycle(&self, lift: &LiftState) -> Result<Vec<LiftVertex>, RotationError> {
        if self.verts.len() < 3 {
            return Err(RotationError::TooShort);
        }
        if !lift.has_edge(self.start(), self.end()) {
            return Err(RotationError::NoClosingEdge);
        }
        Ok(self.verts.clone())
    }
}

impl fmt::Debug for RotationPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 12;
        write!(f, "RotationPath[{}](", self.verts.len())?;
        for (i, v) in self.verts.iter().enumerate() {
            if self.verts.len() > SHOWN && i == SHOWN / 2 {
                write!(f, " …")?;
            }
            if self.verts.len() > SHOWN && i >= SHOWN / 2 && i < self.verts.len() - SHOWN / 2 {
                continue;
            }
            write!(f, "{}{v}", if i == 0 { "" } else { " " })?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::fixtures;
    use crate::rng::rng_from_seed;

    /// A lift of K7 with n = 1: lift vertex `(b, 0)` behaves like base vertex `b`.
    fn k7_single() -> LiftState {
        let inst = fixtures::k7();
        let mut lift = LiftState::new(inst.graph().clone(), inst.h1_order(), 1, rng_from_seed(0));
        lift.lift_h1();
        lift
    }

    fn path(bases: &[usize], lift: &LiftState) -> RotationPath {
        RotationPath::new(
            bases.iter().map(|&b| LiftVertex::new(b, 0)).collect(),
            lift.dims(),
        )
    }

    fn bases(p: &RotationPath) -> Vec<usize> {
        p.vertices().iter().map(|v| v.base).collect()
    }

    #[test]
    fn rotate_follows_the_formula() {
        let mut lift = k7_single();
        // a b c d e = 0 1 2 3 4; chord {4, 1} is a G1 edge of K7.
        lift.reveal_neighbor(LiftVertex::new(4, 0), 1).unwrap();
        let mut p = path(&[0, 1, 2, 3, 4], &lift);
        p.rotate(1, &lift).unwrap();
        assert_eq!(bases(&p), vec![0, 1, 4, 3, 2]);
        assert_eq!(p.position(LiftVertex::new(2, 0)), Some(4));
    }

    #[test]
    fn pivot_m_minus_2_swaps_last_two() {
        let mut lift = k7_single();
        lift.reveal_neighbor(LiftVertex::new(5, 0), 0).unwrap();
        let mut p = path(&[2, 1, 0, 6, 5], &lift);
        p.rotate(2, &lift).unwrap();
        assert_eq!(bases(&p), vec![2, 1, 0, 5, 6]);
    }

    #[test]
    fn rotation_errors() {
        let lift = k7_single();
        let mut p = path(&[0, 1, 2, 3, 4], &lift);
        assert!(matches!(
            p.rotate(0, &lift),
            Err(RotationError::PivotOutOfRange { .. })
        ));
        assert!(matches!(
            p.rotate(3, &lift),
            Err(RotationError::PivotOutOfRange { .. })
        ));
        assert_eq!(p.rotate(1, &lift), Err(RotationError::EdgeNotRevealed));
        assert_eq!(bases(&p), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn reverse_twice_is_identity() {
        let lift = k7_single();
        let p = path(&[0, 1, 2], &lift);
        let r = p.clone().reversed();
        assert_eq!(bases(&r), vec![2, 1, 0]);
        assert_eq!(r.reversed(), p);
    }

    #[test]
    fn candidates_single_chord() {
        let mut lift = k7_single();
        lift.reveal_neighbor(LiftVertex::new(4, 0), 1).unwrap();
        let p = path(&[0, 1, 2, 3, 4], &lift);
        assert_eq!(p.rotation_candidates(&lift), vec![1]);
        // No revealed chord off the path end.
        let q = path(&[0, 1, 2, 3], &lift);
        assert!(q.rotation_candidates(&lift).is_empty());
    }

    #[test]
    fn candidates_reject_inactive_new_end() {
        let mut lift = k7_single();
        lift.reveal_neighbor(LiftVertex::new(4, 0), 1).unwrap();
        lift.reveal_neighbor(LiftVertex::new(2, 0), 5).unwrap();
        let p = path(&[0, 1, 2, 3, 4], &lift);
        assert!(p.rotation_candidates(&lift).is_empty());
    }

    #[test]
    fn close_cycle_needs_the_chord() {
        let mut lift = k7_single();
        let tri = path(&[0, 1, 2], &lift);
        assert_eq!(tri.close_cycle(&lift), Err(RotationError::NoClosingEdge));
        lift.reveal_neighbor(LiftVertex::new(0, 0), 2).unwrap();
        assert_eq!(tri.close_cycle(&lift).unwrap().len(), 3);
        let h1 = path(&[0, 1, 2, 3, 4, 5, 6], &lift);
        assert_eq!(h1.close_cycle(&lift).unwrap().len(), 7);
        assert_eq!(
            path(&[0, 1], &lift).close_cycle(&lift),
            Err(RotationError::TooShort)
        );
    }
}
