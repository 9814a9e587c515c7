//! Heavy-set partitioning for edge-weighted instances.
//!
//! `H(v)` holds the `c_v` heaviest edges at `v`. Edges in both endpoints'
//! heavy sets form `T`; edges in neither are discarded; each remaining edge
//! is directed from the endpoint that does not hold it to the one that
//! does, and filed under the lowest bit where the endpoint labels differ
//! (`A_r` when the tail's bit is 0, `B_r` otherwise). Every family is
//! feasible, and together they cover `sum_v w(H(v))` with `T` counted
//! twice, so the heaviest of the `2k + 1` families is within
//! `2 + 2k` of optimal for `k = ceil(log2 n)`.

use std::cmp::Ordering;

use serde::Serialize;

use crate::graph::{EdgeId, EdgePacking, Instance, VertexId};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeavySets {
    sets: Vec<Vec<EdgeId>>,
    member: Vec<[bool; 2]>,
}

impl HeavySets {
    /// Heavy set of `v`, heaviest first.
    pub fn of(&self, v: VertexId) -> &[EdgeId] {
        &self.sets[v]
    }

    /// Whether `e` lies in the heavy set of `v`; `v` must be an endpoint.
    pub fn contains(&self, inst: &Instance, v: VertexId, e: EdgeId) -> bool {
        let (a, _) = inst.edge(e);
        self.member[e][usize::from(v != a)]
    }

    /// `E_1`: edges in at least one heavy set.
    pub fn union(&self) -> EdgePacking {
        self.sets.iter().flatten().copied().collect()
    }
}

/// Top `c_v` incident edges by weight descending, then EdgeId ascending.
pub fn heavy_sets(inst: &Instance) -> HeavySets {
    let mut member = vec![[false; 2]; inst.m()];
    let sets = (0..inst.n())
        .map(|v| {
            let mut inc: Vec<EdgeId> = inst.incident(v).to_vec();
            inc.sort_by(|&x, &y| heavier_first(inst, x, y));
            inc.truncate(inst.bound(v));
            for &e in &inc {
                let (a, _) = inst.edge(e);
                member[e][usize::from(v != a)] = true;
            }
            inc
        })
        .collect();
    HeavySets { sets, member }
}

fn heavier_first(inst: &Instance, x: EdgeId, y: EdgeId) -> Ordering {
    match inst.weights() {
        Some(w) => w[y].cmp(&w[x]).then(x.cmp(&y)),
        None => x.cmp(&y),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DirectedEdge {
    pub edge: EdgeId,
    /// Endpoint whose heavy set does not contain the edge.
    pub tail: VertexId,
    pub head: VertexId,
    pub bit: usize,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub t: EdgePacking,
    pub discarded: EdgePacking,
    pub directed: Vec<DirectedEdge>,
    /// Number of bit positions, `ceil(log2 n)`.
    pub k: usize,
    pub a: Vec<EdgePacking>,
    pub b: Vec<EdgePacking>,
}

impl Partition {
    /// `T, A_0..A_{k-1}, B_0..B_{k-1}` with their names.
    pub fn families(&self) -> Vec<(String, &EdgePacking)> {
        let mut out = vec![("T".to_owned(), &self.t)];
        out.extend(self.a.iter().enumerate().map(|(r, p)| (format!("A{r}"), p)));
        out.extend(self.b.iter().enumerate().map(|(r, p)| (format!("B{r}"), p)));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyWeight {
    pub family: String,
    #[serde(with = "crate::serde_rational")]
    pub weight: Rational,
    pub edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedSolution {
    pub output: EdgePacking,
    pub chosen: String,
    pub partition: Partition,
    pub family_weights: Vec<FamilyWeight>,
}

/// `ceil(log2 n)`, zero for `n <= 1`.
pub fn bit_count(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

pub fn partition_solve(inst: &Instance) -> WeightedSolution {
    let identity: Vec<usize> = (0..inst.n()).collect();
    partition_solve_labeled(inst, &identity)
}

/// As [`partition_solve`] with `labels[v]` as the label of `v`; `labels`
/// must be a permutation of `0..n`.
pub fn partition_solve_labeled(inst: &Instance, labels: &[usize]) -> WeightedSolution {
    assert_eq!(labels.len(), inst.n(), "one label per vertex");
    let heavy = heavy_sets(inst);
    let k = bit_count(inst.n());
    let mut t = Vec::new();
    let mut discarded = Vec::new();
    let mut directed = Vec::new();
    let mut a = vec![Vec::new(); k];
    let mut b = vec![Vec::new(); k];
    for (e, &(x, y)) in inst.edges().iter().enumerate() {
        let in_x = heavy.contains(inst, x, e);
        let in_y = heavy.contains(inst, y, e);
        let (tail, head) = match (in_x, in_y) {
            (true, true) => {
                t.push(e);
                continue;
            }
            (false, false) => {
                discarded.push(e);
                continue;
            }
            (false, true) => (x, y),
            (true, false) => (y, x),
        };
        let diff = labels[tail] ^ labels[head];
        let bit = diff.trailing_zeros() as usize;
        debug_assert!(bit < k, "distinct labels below n differ in the low k bits");
        let side = if labels[tail] >> bit & 1 == 0 {
            a[bit].push(e);
            Side::A
        } else {
            b[bit].push(e);
            Side::B
        };
        directed.push(DirectedEdge {
            edge: e,
            tail,
            head,
            bit,
            side,
        });
    }
    let partition = Partition {
        t: EdgePacking::from_edges(t),
        discarded: EdgePacking::from_edges(discarded),
        directed,
        k,
        a: a.into_iter().map(EdgePacking::from_edges).collect(),
        b: b.into_iter().map(EdgePacking::from_edges).collect(),
    };
    let family_weights: Vec<FamilyWeight> = partition
        .families()
        .into_iter()
        .map(|(family, p)| FamilyWeight {
            family,
            weight: p.weight(inst),
            edges: p.len(),
        })
        .collect();
    // First maximum wins, so T is preferred on ties.
    let best = family_weights
        .iter()
        .enumerate()
        .fold(0, |best, (i, fw)| {
            if fw.weight > family_weights[best].weight {
                i
            } else {
                best
            }
        });
    let output = partition.families()[best].1.clone();
    WeightedSolution {
        output,
        chosen: family_weights[best].family.clone(),
        partition,
        family_weights,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::{is_feasible, weighted_upper_bound};
    use crate::oracle::exact_opt;
    use crate::{int, Instance};

    #[test]
    fn heavy_sets_on_weighted_path() {
        let p = path3w();
        let h = heavy_sets(&p);
        assert_eq!(h.of(0), &[0]);
        assert_eq!(h.of(1), &[0]);
        assert_eq!(h.of(2), &[1]);
    }

    #[test]
    fn equal_weights_break_ties_by_id() {
        let inst = Instance::new(
            5,
            vec![(0, 1), (0, 2), (0, 3), (0, 4)],
            vec![2, 1, 1, 1, 1],
            Some(vec![int(1); 4]),
        )
        .unwrap();
        assert_eq!(heavy_sets(&inst).of(0), &[0, 1]);
    }

    #[test]
    fn full_bounds_keep_every_edge() {
        let inst = Instance::new(3, vec![(0, 1), (1, 2), (0, 2)], vec![2; 3], None).unwrap();
        let sol = partition_solve(&inst);
        assert_eq!(heavy_sets(&inst).union(), EdgePacking::all(&inst));
        assert!(sol.partition.discarded.is_empty());
    }

    #[test]
    fn bit_counts() {
        assert_eq!(
            (0..10).map(bit_count).collect::<Vec<_>>(),
            vec![0, 0, 1, 2, 2, 3, 3, 3, 3, 4]
        );
    }

    #[test]
    fn weighted_path_trace() {
        let p = path3w();
        let sol = partition_solve(&p);
        assert_eq!(sol.partition.t, EdgePacking::from_edges([0]));
        assert_eq!(sol.partition.k, 2);
        assert_eq!(
            sol.partition.directed,
            vec![DirectedEdge {
                edge: 1,
                tail: 1,
                head: 2,
                bit: 0,
                side: Side::B
            }]
        );
        assert_eq!(sol.partition.b[0], EdgePacking::from_edges([1]));
        assert_eq!(sol.chosen, "T");
        assert_eq!(sol.output.weight(&p), int(3));
        let opt = exact_opt(&p).unwrap().value;
        assert_eq!(opt, int(4));
        assert!(opt <= int(2 + 2 * 2) * sol.output.weight(&p));
    }

    #[test]
    fn disjoint_edges_are_all_in_t() {
        let inst = Instance::new(
            4,
            vec![(0, 1), (2, 3)],
            vec![1; 4],
            Some(vec![int(7), int(2)]),
        )
        .unwrap();
        let sol = partition_solve(&inst);
        assert_eq!(sol.output, EdgePacking::all(&inst));
    }

    #[test]
    fn single_vertex() {
        let inst = Instance::uniform(1, vec![], 0).unwrap();
        let sol = partition_solve(&inst);
        assert_eq!(sol.partition.k, 0);
        assert_eq!(sol.chosen, "T");
        assert!(sol.output.is_empty());
    }

    #[test]
    fn random_certificates() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..150 {
            let n = rng.gen_range(2..9);
            let m = rng.gen_range(0..13);
            let edges: Vec<_> = (0..m)
                .map(|_| {
                    let u = rng.gen_range(0..n);
                    let v = (u + rng.gen_range(1..n)) % n;
                    (u, v)
                })
                .collect();
            let bounds = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let weights = (0..m).map(|_| int(rng.gen_range(1..101))).collect();
            let inst = Instance::new(n, edges, bounds, Some(weights)).unwrap();
            let mut labels: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(labels.as_mut_slice(), &mut rng);
            let sol = partition_solve_labeled(&inst, &labels);
            let part = &sol.partition;

            let mut cover: Vec<EdgeId> = part.t.iter().chain(part.discarded.iter()).collect();
            for (_, fam) in part.families().into_iter().skip(1) {
                assert!(is_feasible(&inst, fam));
                cover.extend(fam.iter());
            }
            assert!(is_feasible(&inst, &part.t));
            cover.sort_unstable();
            assert_eq!(cover, (0..m).collect::<Vec<_>>());

            let e1: EdgePacking = (0..m).filter(|&e| !part.discarded.contains(e)).collect();
            assert_eq!(heavy_sets(&inst).union(), e1);

            let opt = exact_opt(&inst).unwrap().value;
            let bound = weighted_upper_bound(&inst);
            let fams: Rational = sol.family_weights.iter().map(|f| f.weight.clone()).sum();
            assert!(opt <= bound);
            assert_eq!(bound, fams + part.t.weight(&inst));
            let k = int(2 + 2 * part.k as i64);
            assert!(opt <= k * sol.output.weight(&inst));
        }
    }
}
