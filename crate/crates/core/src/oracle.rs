//! Exhaustive exact solver used as ground truth on small instances.
//!
//! The search walks edges in id order and branches include-then-exclude.
//! Two exact prunings apply: a partial set in which some chosen edge has
//! both endpoints over bound is abandoned (degrees only grow, so the
//! violation persists in every superset), and a branch whose optimistic
//! completion is strictly below the incumbent is cut. Among optimal sets
//! the lexicographically smallest sorted id sequence is returned.

use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::graph::{is_feasible, EdgePacking, Instance};
use crate::Rational;

pub const DEFAULT_MAX_EDGES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {m} edges; exhaustive search is limited to {limit}")]
    TooLarge { m: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub max_edges: usize,
    /// Disable for audit runs: every one of the `2^m` subsets is checked.
    pub prune: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            max_edges: DEFAULT_MAX_EDGES,
            prune: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Optimal weight (cardinality when the instance is unweighted).
    pub value: Rational,
    pub witness: EdgePacking,
    /// Search nodes visited.
    pub explored: u64,
}

pub fn exact_opt(inst: &Instance) -> Result<OracleResult, OracleError> {
    exact_opt_with(inst, &OracleConfig::default())
}

pub fn exact_opt_with(inst: &Instance, config: &OracleConfig) -> Result<OracleResult, OracleError> {
    if inst.m() > config.max_edges {
        return Err(OracleError::TooLarge {
            m: inst.m(),
            limit: config.max_edges,
        });
    }
    let (scale, scaled) = integer_weights(inst);
    let small: Option<Vec<u64>> = scaled.iter().map(|w| w.to_u64()).collect();
    let fits = small
        .as_ref()
        .is_some_and(|w| w.iter().try_fold(0u64, |acc, &x| acc.checked_add(x)).is_some());
    let (score, witness, explored) = match small {
        Some(w) if fits => {
            let (s, wit, ex) = run(inst, &w, config.prune);
            (BigInt::from(s), wit, ex)
        }
        _ => run(inst, &scaled, config.prune),
    };
    Ok(OracleResult {
        value: Rational::new(score, scale),
        witness,
        explored,
    })
}

/// Weights multiplied by the lcm of their denominators.
fn integer_weights(inst: &Instance) -> (BigInt, Vec<BigInt>) {
    match inst.weights() {
        None => (BigInt::from(1), vec![BigInt::from(1); inst.m()]),
        Some(w) => {
            let scale = w
                .iter()
                .fold(BigInt::from(1), |acc, q| acc.lcm(q.denom()));
            let scaled = w
                .iter()
                .map(|q| q.numer() * (&scale / q.denom()))
                .collect();
            (scale, scaled)
        }
    }
}

trait Score: Clone + Ord + Zero + for<'a> Add<&'a Self, Output = Self> {}
impl<T: Clone + Ord + Zero + for<'a> Add<&'a T, Output = T>> Score for T {}

fn run<W: Score>(inst: &Instance, weights: &[W], prune: bool) -> (W, EdgePacking, u64) {
    if prune {
        let mut search = Search::new(inst, weights);
        search.dfs(0, W::zero());
        let best = search.best.expect("empty set is always feasible");
        (best.0, EdgePacking::from_edges(best.1), search.explored)
    } else {
        sweep(inst, weights)
    }
}

fn better<W: Ord>(score: &W, set: &[usize], best: &Option<(W, Vec<usize>)>) -> bool {
    match best {
        None => true,
        Some((bs, bset)) => score > bs || (score == bs && set < bset.as_slice()),
    }
}

fn sweep<W: Score>(inst: &Instance, weights: &[W]) -> (W, EdgePacking, u64) {
    let m = inst.m();
    let mut best: Option<(W, Vec<usize>)> = None;
    let mut explored = 0u64;
    for mask in 0u64..(1u64 << m) {
        explored += 1;
        let set: Vec<usize> = (0..m).filter(|&e| mask >> e & 1 == 1).collect();
        let p = EdgePacking::from_edges(set.iter().copied());
        if !is_feasible(inst, &p) {
            continue;
        }
        let score = set.iter().fold(W::zero(), |acc, &e| acc + &weights[e]);
        if better(&score, &set, &best) {
            best = Some((score, set));
        }
    }
    let (score, set) = best.expect("empty set is always feasible");
    (score, EdgePacking::from_edges(set), explored)
}

struct Search<'a, W> {
    inst: &'a Instance,
    weights: &'a [W],
    suffix: Vec<W>,
    degree: Vec<usize>,
    chosen: Vec<bool>,
    stack: Vec<usize>,
    best: Option<(W, Vec<usize>)>,
    explored: u64,
}

impl<'a, W: Score> Search<'a, W> {
    fn new(inst: &'a Instance, weights: &'a [W]) -> Self {
        let m = inst.m();
        let mut suffix = vec![W::zero(); m + 1];
        for e in (0..m).rev() {
            suffix[e] = suffix[e + 1].clone() + &weights[e];
        }
        Self {
            inst,
            weights,
            suffix,
            degree: vec![0; inst.n()],
            chosen: vec![false; m],
            stack: Vec::new(),
            best: None,
            explored: 0,
        }
    }

    /// True if some chosen edge at `x` now has both endpoints over bound.
    fn violated_at(&self, x: usize) -> bool {
        if self.degree[x] <= self.inst.bound(x) {
            return false;
        }
        self.inst.incident(x).iter().any(|&f| {
            self.chosen[f] && {
                let y = self.inst.other_endpoint(f, x);
                self.degree[y] > self.inst.bound(y)
            }
        })
    }

    fn dfs(&mut self, e: usize, score: W) {
        self.explored += 1;
        if let Some((best, _)) = &self.best {
            if score.clone() + &self.suffix[e] < *best {
                return;
            }
        }
        if e == self.inst.m() {
            if better(&score, &self.stack, &self.best) {
                self.best = Some((score, self.stack.clone()));
            }
            return;
        }
        let (u, v) = self.inst.edge(e);
        self.degree[u] += 1;
        self.degree[v] += 1;
        self.chosen[e] = true;
        if !self.violated_at(u) && !self.violated_at(v) {
            self.stack.push(e);
            self.dfs(e + 1, score.clone() + &self.weights[e]);
            self.stack.pop();
        }
        self.chosen[e] = false;
        self.degree[u] -= 1;
        self.degree[v] -= 1;
        self.dfs(e + 1, score);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::int;

    const AUDIT: OracleConfig = OracleConfig {
        max_edges: 20,
        prune: false,
    };

    #[test]
    fn triangle_optimum() {
        let r = exact_opt(&tri()).unwrap();
        assert_eq!(r.value, int(2));
        assert_eq!(r.witness, EdgePacking::from_edges([0, 1]));
        assert_eq!(exact_opt_with(&tri(), &AUDIT).unwrap().witness, r.witness);
    }

    #[test]
    fn star_optimum() {
        assert_eq!(exact_opt(&star4()).unwrap().value, int(4));
    }

    #[test]
    fn weighted_path_optimum() {
        let r = exact_opt(&path3w()).unwrap();
        assert_eq!(r.value, int(4));
        assert_eq!(r.witness, EdgePacking::from_edges([0, 1]));
    }

    #[test]
    fn refuses_large_instances() {
        let edges: Vec<_> = (0..30).map(|i| (0, i + 1)).collect();
        let inst = Instance::uniform(31, edges, 1).unwrap();
        assert_eq!(
            exact_opt(&inst),
            Err(OracleError::TooLarge { m: 30, limit: 24 })
        );
    }

    #[test]
    fn complete_graph_k6() {
        let mut edges = Vec::new();
        for i in 0..6 {
            for j in i + 1..6 {
                edges.push((i, j));
            }
        }
        let inst = Instance::uniform(6, edges, 1).unwrap();
        assert_eq!(exact_opt(&inst).unwrap().value, int(5));
    }

    #[test]
    fn pruned_and_audit_modes_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.gen_range(2..7);
            let m = rng.gen_range(0..11);
            let edges: Vec<_> = (0..m)
                .map(|_| {
                    let u = rng.gen_range(0..n);
                    let mut v = rng.gen_range(0..n - 1);
                    if v >= u {
                        v += 1;
                    }
                    (u, v)
                })
                .collect();
            let bounds = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let weights = rng
                .gen_bool(0.5)
                .then(|| (0..m).map(|_| crate::ratio(rng.gen_range(0..20), rng.gen_range(1..4))).collect());
            let inst = Instance::new(n, edges, bounds, weights).unwrap();
            let a = exact_opt(&inst).unwrap();
            let b = exact_opt_with(&inst, &AUDIT).unwrap();
            assert_eq!(a.value, b.value);
            assert_eq!(a.witness, b.witness);
            assert!(is_feasible(&inst, &a.witness));
            assert_eq!(a.witness.weight(&inst), a.value);
        }
    }
}
