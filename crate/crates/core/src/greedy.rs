//! Combinatorial approximations: edge addition (factor 4) and edge
//! deletion (factor 2).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::{EdgeId, EdgePacking, Instance, VertexId};

/// A permutation of the edge ids of an instance, used as the scan order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeOrder(Vec<EdgeId>);

impl EdgeOrder {
    pub fn natural(m: usize) -> Self {
        Self((0..m).collect())
    }

    /// Uniformly shuffled order, fully determined by `seed`.
    pub fn seeded(m: usize, seed: u64) -> Self {
        let mut ids: Vec<EdgeId> = (0..m).collect();
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self(ids)
    }

    /// Returns `None` unless `ids` is a permutation of `0..ids.len()`.
    pub fn from_permutation(ids: Vec<EdgeId>) -> Option<Self> {
        let mut seen = vec![false; ids.len()];
        for &e in &ids {
            if e >= ids.len() || std::mem::replace(&mut seen[e], true) {
                return None;
            }
        }
        Some(Self(ids))
    }

    pub fn as_slice(&self) -> &[EdgeId] {
        &self.0
    }

    fn resolve(order: Option<&EdgeOrder>, m: usize) -> EdgeOrder {
        match order {
            Some(o) => {
                assert_eq!(o.0.len(), m, "edge order does not match instance size");
                o.clone()
            }
            None => Self::natural(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Chosen {
    Y,
    Z,
}

/// Intermediate sets of the edge addition algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GreedyTrace {
    pub order: EdgeOrder,
    /// Maximal feasible set grown by the scan.
    pub y: EdgePacking,
    /// Vertices whose Y-degree is below their bound.
    pub deficient: Vec<VertexId>,
    /// Per deficient vertex, its missing number of non-Y incident edges.
    pub z: EdgePacking,
    pub chosen: Chosen,
}

struct DegreeState<'a> {
    inst: &'a Instance,
    degree: Vec<usize>,
    member: Vec<bool>,
}

impl<'a> DegreeState<'a> {
    fn over(&self, x: VertexId) -> bool {
        self.degree[x] > self.inst.bound(x)
    }

    /// Some member edge at `x` has both endpoints over bound.
    fn violated_at(&self, x: VertexId) -> bool {
        self.over(x)
            && self.inst.incident(x).iter().any(|&f| {
                self.member[f] && self.over(self.inst.other_endpoint(f, x))
            })
    }

    fn try_add(&mut self, e: EdgeId) -> bool {
        let (u, v) = self.inst.edge(e);
        self.degree[u] += 1;
        self.degree[v] += 1;
        self.member[e] = true;
        if self.violated_at(u) || self.violated_at(v) {
            self.degree[u] -= 1;
            self.degree[v] -= 1;
            self.member[e] = false;
            false
        } else {
            true
        }
    }
}

/// Grows a maximal feasible set Y in scan order, then builds Z from the
/// deficient vertices and returns the larger of the two (ties go to Y).
pub fn edge_addition(inst: &Instance, order: Option<&EdgeOrder>) -> (EdgePacking, GreedyTrace) {
    let order = EdgeOrder::resolve(order, inst.m());
    let mut state = DegreeState {
        inst,
        degree: vec![0; inst.n()],
        member: vec![false; inst.m()],
    };
    for &e in order.as_slice() {
        state.try_add(e);
    }
    let y = EdgePacking::from_mask(&state.member);
    let deficient: Vec<VertexId> = (0..inst.n())
        .filter(|&v| state.degree[v] < inst.bound(v))
        .collect();

    let mut z = Vec::new();
    let mut claimed = vec![false; inst.m()];
    for &a in &deficient {
        let need = inst.bound(a) - state.degree[a];
        let picks: Vec<EdgeId> = inst
            .incident(a)
            .iter()
            .copied()
            .filter(|&e| !state.member[e])
            .take(need)
            .collect();
        debug_assert_eq!(picks.len(), need, "bound exceeds available non-Y edges");
        for &e in &picks {
            // The non-Y edges at distinct deficient vertices are disjoint.
            assert!(!claimed[e], "edge {e} incident on two deficient vertices");
            claimed[e] = true;
        }
        z.extend(picks);
    }
    let z = EdgePacking::from_edges(z);

    let chosen = if y.len() >= z.len() { Chosen::Y } else { Chosen::Z };
    let output = match chosen {
        Chosen::Y => y.clone(),
        Chosen::Z => z.clone(),
    };
    (
        output,
        GreedyTrace {
            order,
            y,
            deficient,
            z,
            chosen,
        },
    )
}

/// Starts from all edges and, in one ordered pass, drops every edge whose
/// endpoints both exceed their bounds at the moment it is scanned.
pub fn edge_deletion(inst: &Instance, order: Option<&EdgeOrder>) -> EdgePacking {
    let order = EdgeOrder::resolve(order, inst.m());
    let mut degree: Vec<usize> = (0..inst.n()).map(|v| inst.degree(v)).collect();
    let mut keep = vec![true; inst.m()];
    for &e in order.as_slice() {
        let (u, v) = inst.edge(e);
        if degree[u] > inst.bound(u) && degree[v] > inst.bound(v) {
            keep[e] = false;
            degree[u] -= 1;
            degree[v] -= 1;
        }
    }
    EdgePacking::from_mask(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::{is_feasible, packing_degrees, upper_bound};
    use crate::harness::generate::{generate, BoundPolicy, Family, GeneratorSpec, WeightPolicy};
    use crate::oracle::exact_opt;
    use num_traits::ToPrimitive;

    #[test]
    fn addition_on_triangle() {
        let (out, trace) = edge_addition(&tri(), None);
        assert_eq!(trace.y, EdgePacking::from_edges([0, 1]));
        assert!(trace.deficient.is_empty());
        assert!(trace.z.is_empty());
        assert_eq!(trace.chosen, Chosen::Y);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn addition_on_star_takes_everything() {
        let s = star4();
        let (out, _) = edge_addition(&s, None);
        assert_eq!(out, EdgePacking::all(&s));
    }

    #[test]
    fn zero_bounds_give_empty_output() {
        let inst = Instance::uniform(4, vec![(0, 1), (1, 2), (2, 3)], 0).unwrap();
        let (out, trace) = edge_addition(&inst, None);
        assert!(out.is_empty() && trace.y.is_empty() && trace.deficient.is_empty());
    }

    #[test]
    fn addition_can_return_z() {
        // Hub 0 (bound 0) takes the three middle vertices first, which
        // blocks every edge from 4 and 5; both are left deficient by 3.
        let edges = vec![(0, 1), (0, 2), (0, 3), (4, 1), (4, 2), (4, 3), (5, 1), (5, 2), (5, 3)];
        let inst = Instance::new(6, edges, vec![0, 1, 1, 1, 3, 3], None).unwrap();
        let (out, trace) = edge_addition(&inst, None);
        assert_eq!(trace.y, EdgePacking::from_edges([0, 1, 2]));
        assert_eq!(trace.deficient, vec![4, 5]);
        assert_eq!(trace.z, EdgePacking::from_edges(3..9));
        assert_eq!(trace.chosen, Chosen::Z);
        assert_eq!(out.len(), 6);
        assert!(is_feasible(&inst, &out));

        // Star with center bound 2 and a leaf edge scanned first.
        let inst = Instance::new(
            4,
            vec![(1, 2), (0, 1), (0, 2), (0, 3)],
            vec![2, 1, 1, 1],
            None,
        )
        .unwrap();
        let (out, trace) = edge_addition(&inst, None);
        assert!(is_feasible(&inst, &out));
        assert!(out.len() >= trace.y.len().max(trace.z.len()));
    }

    #[test]
    fn deletion_examples() {
        let t = tri();
        assert_eq!(edge_deletion(&t, None), EdgePacking::from_edges([1, 2]));
        let s = star4();
        assert_eq!(edge_deletion(&s, None), EdgePacking::all(&s));
        let single = Instance::uniform(2, vec![(0, 1)], 1).unwrap();
        assert_eq!(edge_deletion(&single, None).len(), 1);
    }

    #[test]
    fn order_validation() {
        assert!(EdgeOrder::from_permutation(vec![1, 0, 2]).is_some());
        assert!(EdgeOrder::from_permutation(vec![1, 1, 2]).is_none());
        assert!(EdgeOrder::from_permutation(vec![0, 3]).is_none());
        assert_eq!(EdgeOrder::seeded(10, 4), EdgeOrder::seeded(10, 4));
    }

    #[test]
    fn randomized_certificates() {
        for seed in 0..300u64 {
            let family = if seed % 3 == 0 {
                Family::RandomTree
            } else {
                Family::Gnm
            };
            let n = 3 + (seed % 7) as usize;
            let spec = GeneratorSpec {
                family,
                n,
                m: (n + seed as usize % 6).min(n * (n - 1) / 2),
                bounds: BoundPolicy::UniformRandom,
                weights: WeightPolicy::None,
                seed,
            };
            let inst = generate(&spec).unwrap();
            let opt = exact_opt(&inst).unwrap().value.to_integer().to_usize().unwrap();
            let order = EdgeOrder::seeded(inst.m(), seed);

            let (add, trace) = edge_addition(&inst, Some(&order));
            assert!(is_feasible(&inst, &add));
            let covered = packing_degrees(&inst, &trace.y.union(&trace.z));
            assert!((0..inst.n()).all(|v| covered[v] >= inst.bound(v)));
            assert!(trace.y.is_disjoint(&trace.z));
            assert!(opt <= 4 * add.len());
            assert!(4 * add.len() as u64 >= upper_bound(&inst));

            let del = edge_deletion(&inst, Some(&order));
            assert!(is_feasible(&inst, &del));
            let deg = packing_degrees(&inst, &del);
            assert!((0..inst.n()).all(|v| deg[v] >= inst.bound(v)));
            assert!(opt <= 2 * del.len());
        }
    }
}
