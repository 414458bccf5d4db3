#![allow(dead_code)]

use std::sync::Arc;

use liftham::base::{fixtures, random_instance};
use liftham::oracle::ExplicitGraph;
use liftham::rng::rng_from_seed;
use liftham::{BaseGraph, BaseInstance, LiftState, LiftVertex};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fresh_lift(inst: &BaseInstance, n: usize, seed: u64) -> LiftState {
    LiftState::new(inst.graph().clone(), inst.h1_order(), n, rng_from_seed(seed))
}

pub fn cycle_lift(k: usize, n: usize, seed: u64) -> LiftState {
    let order: Vec<usize> = (0..k).collect();
    LiftState::new(
        Arc::new(BaseGraph::cycle(&order).unwrap()),
        &order,
        n,
        rng_from_seed(seed),
    )
}

/// Greedy self-avoiding walk over the revealed edges, at most `max_len` vertices.
pub fn random_walk_path<R: Rng>(lift: &LiftState, max_len: usize, rng: &mut R) -> Vec<LiftVertex> {
    let d = lift.dims();
    let g = ExplicitGraph::from_lift(lift);
    let mut seen = vec![false; d.vertex_count()];
    let mut cur = rng.gen_range(0..d.vertex_count());
    let mut path = vec![d.vertex(cur)];
    seen[cur] = true;
    while path.len() < max_len {
        let mut next: Vec<usize> = g.neighbors(cur).iter().copied().filter(|&w| !seen[w]).collect();
        if next.is_empty() {
            break;
        }
        next.shuffle(rng);
        cur = next[0];
        seen[cur] = true;
        path.push(d.vertex(cur));
    }
    path
}

/// Composition of the H₁ matchings read straight off the revealed neighbours.
pub fn composed_h1_permutation(lift: &LiftState) -> Vec<usize> {
    let h1 = lift.h1_order().to_vec();
    (0..lift.n())
        .map(|start| {
            let mut v = LiftVertex::new(h1[0], start);
            for j in 0..h1.len() {
                v = lift.neighbor(v, h1[(j + 1) % h1.len()]).expect("H1 revealed");
            }
            v.fiber
        })
        .collect()
}

/// Fixtures plus `count` valid random instances with `k` in `5..=max_k`.
pub fn instance_pool(count: usize, max_k: usize, seed: u64) -> Vec<BaseInstance> {
    let mut rng = rng_from_seed(seed);
    let mut out = vec![fixtures::k5(), fixtures::k7(), fixtures::circulant9()];
    while out.len() < count + 3 {
        let k = rng.gen_range(5..=max_k);
        let inst = random_instance(k, 5.min(k - 1), &mut rng);
        if inst.validate(0).passed {
            out.push(inst);
        }
    }
    out
}

/// Upper-tail chi-square statistic against a uniform expectation.
pub fn chi_square(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

/// `P(C ≥ c)` for the cycle count `C` of a uniform permutation of `0..n`,
/// from the product generating function `∏ (x + i) / (i + 1)`.
pub fn cycle_count_tail(n: usize, c: usize) -> f64 {
    let mut dist = vec![1.0f64];
    for i in 0..n {
        let mut next = vec![0.0; dist.len() + 1];
        for (j, &p) in dist.iter().enumerate() {
            next[j + 1] += p / (i + 1) as f64;
            next[j] += p * i as f64 / (i + 1) as f64;
        }
        dist = next;
    }
    dist.iter().skip(c).sum()
}
