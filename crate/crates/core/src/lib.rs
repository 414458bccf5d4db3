//! Hamilton cycles in random lifts of graphs.
//!
//! A random n-lift replaces every vertex of a base graph by a fiber of `n`
//! vertices and every edge by a uniform perfect matching between fibers.
//! This crate samples such lifts lazily, runs a rotation-extension search
//! for a Hamilton cycle in them, and ships the independent oracles and the
//! experiment runner used to check the search.

pub mod altpath;
pub mod base;
pub mod error;
pub mod finder;
pub mod harness;
pub mod lift;
pub mod oracle;
pub mod rng;
pub mod rotation;

pub use base::{BaseGraph, BaseInstance, DirectedH1, ValidationReport};
pub use lift::{LiftDims, LiftState, LiftVertex};
pub use rotation::RotationPath;
