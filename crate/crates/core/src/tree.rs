//! Exact dynamic program for unweighted trees.
//!
//! For every vertex `v` of the rooted tree three subtree optima are kept:
//!
//! * `h(v)`: best packing of `T(v)` with `d'(v) <= c_v - 1`,
//! * `g(v)`: best packing with `d'(v) = c_v`,
//! * `b(v)`: best packing with `d'(v) >= c_v` in which every chosen
//!   neighbour of `v` is within its own bound.
//!
//! Children are classified by which label is largest (ties favour `h`, and
//! `b = g > h` goes to the `b` class), and the cheapest conversions needed to
//! free attachment capacity are chosen by sorting, which gives the
//! `O(n log n)` bound. The reported optimum is the best label at the root;
//! the witness is rebuilt by replaying the same choices top-down.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{EdgeId, EdgePacking, Instance, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("not a tree: m ≠ n−1 (n = {n}, m = {m})")]
    EdgeCount { n: usize, m: usize },
    #[error("not a tree: cycle found through edge {edge}")]
    Cycle { edge: EdgeId },
    #[error("not a tree: disconnected (vertex {vertex} unreachable from root)")]
    Disconnected { vertex: VertexId },
    #[error("not a tree: instance has no vertices")]
    Empty,
    #[error("root {root} out of range (n = {n})")]
    BadRoot { root: VertexId, n: usize },
    #[error("tree solver requires an unweighted instance")]
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    pub root: VertexId,
    pub parent: Vec<Option<VertexId>>,
    pub parent_edge: Vec<Option<EdgeId>>,
    /// Children in increasing VertexId order.
    pub children: Vec<Vec<VertexId>>,
    /// Every vertex after all of its children.
    pub order: Vec<VertexId>,
}

pub fn root_tree(inst: &Instance, root: Option<VertexId>) -> Result<RootedTree, TreeError> {
    let n = inst.n();
    if n == 0 {
        return Err(TreeError::Empty);
    }
    let root = root.unwrap_or(0);
    if root >= n {
        return Err(TreeError::BadRoot { root, n });
    }
    if inst.m() + 1 != n {
        return Err(TreeError::EdgeCount { n, m: inst.m() });
    }
    let mut parent = vec![None; n];
    let mut parent_edge = vec![None; n];
    let mut seen = vec![false; n];
    let mut bfs = Vec::with_capacity(n);
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(v) = queue.pop_front() {
        bfs.push(v);
        for &e in inst.incident(v) {
            if parent_edge[v] == Some(e) {
                continue;
            }
            let u = inst.other_endpoint(e, v);
            if seen[u] {
                return Err(TreeError::Cycle { edge: e });
            }
            seen[u] = true;
            parent[u] = Some(v);
            parent_edge[u] = Some(e);
            queue.push_back(u);
        }
    }
    if let Some(vertex) = seen.iter().position(|&s| !s) {
        return Err(TreeError::Disconnected { vertex });
    }
    let mut children = vec![Vec::new(); n];
    for v in 0..n {
        if let Some(p) = parent[v] {
            children[p].push(v);
        }
    }
    bfs.reverse();
    Ok(RootedTree {
        root,
        parent,
        parent_edge,
        children,
        order: bfs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Kind {
    H,
    G,
    B,
}

/// Per-vertex labels; `None` marks an empty solution class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeLabels {
    pub h: Vec<Option<u64>>,
    pub g: Vec<Option<u64>>,
    pub b: Vec<Option<u64>>,
    /// Class of each vertex within its parent's child partition (the root
    /// gets the class of its best label).
    pub class: Vec<Kind>,
    /// Children of `v` in the `g` class converted to free capacity for `g(v)`.
    pub s_prime: Vec<Vec<VertexId>>,
    /// Children converted to their `h` solution for `b(v)`.
    pub s_double: Vec<Vec<VertexId>>,
}

impl TreeLabels {
    /// Label values with empty classes reported as 0.
    pub fn values(&self, v: VertexId) -> (u64, u64, u64) {
        (
            self.h[v].unwrap_or(0),
            self.g[v].unwrap_or(0),
            self.b[v].unwrap_or(0),
        )
    }

    fn get(&self, v: VertexId, kind: Kind) -> Option<u64> {
        match kind {
            Kind::H => self.h[v],
            Kind::G => self.g[v],
            Kind::B => self.b[v],
        }
    }

    fn best(&self, v: VertexId) -> u64 {
        [self.h[v], self.g[v], self.b[v]]
            .into_iter()
            .flatten()
            .max()
            .expect("every subtree has a feasible class")
    }
}

/// Partition rule: `h >= max(g, b)` → H, `g > max(h, b)` → G, else B.
fn classify(h: Option<u64>, g: Option<u64>, b: Option<u64>) -> Kind {
    if h.is_some() && h >= g && h >= b {
        Kind::H
    } else if g.is_some() && g > h && g > b {
        Kind::G
    } else {
        Kind::B
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeSolution {
    pub value: u64,
    pub root_kind: Kind,
    pub labels: TreeLabels,
    pub witness: EdgePacking,
    pub tree: RootedTree,
}

pub fn tree_dp(inst: &Instance, root: Option<VertexId>) -> Result<TreeSolution, TreeError> {
    if inst.is_weighted() {
        return Err(TreeError::Weighted);
    }
    let tree = root_tree(inst, root)?;
    let n = inst.n();
    let mut labels = TreeLabels {
        h: vec![None; n],
        g: vec![None; n],
        b: vec![None; n],
        class: vec![Kind::H; n],
        s_prime: vec![Vec::new(); n],
        s_double: vec![Vec::new(); n],
    };

    for &v in &tree.order {
        let kids = &tree.children[v];
        let c = inst.bound(v);
        let mut base = 0u64;
        let (mut n_h, mut n_b) = (0usize, 0usize);
        let mut g_loss: Vec<(u64, VertexId)> = Vec::new();
        let mut h_loss: Vec<(u64, VertexId)> = Vec::new();
        for &u in kids {
            base += labels.best(u);
            match labels.class[u] {
                Kind::H => n_h += 1,
                Kind::B => {
                    n_b += 1;
                    if let Some(h) = labels.h[u] {
                        h_loss.push((labels.b[u].unwrap() - h, u));
                    }
                }
                Kind::G => {
                    let g = labels.g[u].unwrap();
                    let alt = labels.h[u].max(labels.b[u]).expect("h or b is feasible");
                    g_loss.push((g - alt, u));
                    if let Some(h) = labels.h[u] {
                        h_loss.push((g - h, u));
                    }
                }
            }
        }

        labels.h[v] = (c >= 1).then(|| base + (c - 1).min(n_h + n_b) as u64);

        if kids.len() >= c {
            let need = c.saturating_sub(n_h + n_b);
            g_loss.sort_unstable();
            let chosen = &g_loss[..need];
            labels.g[v] = Some(base - chosen.iter().map(|x| x.0).sum::<u64>() + c as u64);
            let mut s: Vec<VertexId> = chosen.iter().map(|x| x.1).collect();
            s.sort_unstable();
            labels.s_prime[v] = s;
        }

        let need = c.saturating_sub(n_h);
        if h_loss.len() >= need {
            h_loss.sort_unstable();
            let chosen = &h_loss[..need];
            labels.b[v] =
                Some(base - chosen.iter().map(|x| x.0).sum::<u64>() + c.max(n_h) as u64);
            let mut s: Vec<VertexId> = chosen.iter().map(|x| x.1).collect();
            s.sort_unstable();
            labels.s_double[v] = s;
        }

        labels.class[v] = classify(labels.h[v], labels.g[v], labels.b[v]);
    }

    let r = tree.root;
    let root_kind = [Kind::H, Kind::G, Kind::B]
        .into_iter()
        .filter(|&k| labels.get(r, k).is_some())
        .fold(None::<Kind>, |best, k| match best {
            Some(b) if labels.get(r, b) >= labels.get(r, k) => Some(b),
            _ => Some(k),
        })
        .expect("root has a feasible class");
    let value = labels.get(r, root_kind).unwrap();
    let witness = reconstruct(inst, &tree, &labels, root_kind);
    debug_assert_eq!(witness.len() as u64, value);
    Ok(TreeSolution {
        value,
        root_kind,
        labels,
        witness,
        tree,
    })
}

/// For `v` solved as `kind`, the kind used by each child and whether the
/// edge to that child is chosen.
fn child_plan(
    inst: &Instance,
    tree: &RootedTree,
    labels: &TreeLabels,
    v: VertexId,
    kind: Kind,
) -> Vec<(VertexId, Kind, bool)> {
    let c = inst.bound(v);
    let kids = &tree.children[v];
    let hb = kids
        .iter()
        .filter(|&&u| labels.class[u] != Kind::G)
        .count();
    match kind {
        Kind::H => {
            let mut budget = c.saturating_sub(1).min(hb);
            kids.iter()
                .map(|&u| {
                    let cls = labels.class[u];
                    let attach = cls != Kind::G && budget > 0;
                    if attach {
                        budget -= 1;
                    }
                    (u, cls, attach)
                })
                .collect()
        }
        Kind::G => {
            let sp = &labels.s_prime[v];
            let expand = c > hb;
            let mut budget = c;
            kids.iter()
                .map(|&u| {
                    let cls = labels.class[u];
                    if sp.binary_search(&u).is_ok() {
                        let k = if labels.h[u] >= labels.b[u] {
                            Kind::H
                        } else {
                            Kind::B
                        };
                        (u, k, true)
                    } else if cls == Kind::G {
                        (u, Kind::G, false)
                    } else {
                        let attach = expand || budget > 0;
                        if !expand && attach {
                            budget -= 1;
                        }
                        (u, cls, attach)
                    }
                })
                .collect()
        }
        Kind::B => {
            let sd = &labels.s_double[v];
            kids.iter()
                .map(|&u| {
                    let cls = labels.class[u];
                    if cls == Kind::H || sd.binary_search(&u).is_ok() {
                        (u, Kind::H, true)
                    } else {
                        (u, cls, false)
                    }
                })
                .collect()
        }
    }
}

fn reconstruct(
    inst: &Instance,
    tree: &RootedTree,
    labels: &TreeLabels,
    root_kind: Kind,
) -> EdgePacking {
    let mut chosen = Vec::new();
    let mut stack = vec![(tree.root, root_kind)];
    while let Some((v, kind)) = stack.pop() {
        for (u, k, attach) in child_plan(inst, tree, labels, v, kind) {
            if attach {
                chosen.push(tree.parent_edge[u].expect("child has a parent edge"));
            }
            stack.push((u, k));
        }
    }
    EdgePacking::from_edges(chosen)
}

/// Whether the instance has no cycle (parallel edges count as one).
pub fn is_forest(inst: &Instance) -> bool {
    let mut parent: Vec<usize> = (0..inst.n()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    inst.edges().iter().all(|&(u, v)| {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
        a != b
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestSolution {
    pub value: u64,
    pub witness: EdgePacking,
    pub components: usize,
}

/// Solves each connected component of an acyclic instance separately and
/// combines the results.
pub fn forest_dp(inst: &Instance) -> Result<ForestSolution, TreeError> {
    if inst.is_weighted() {
        return Err(TreeError::Weighted);
    }
    let n = inst.n();
    let mut comp = vec![usize::MAX; n];
    let mut members: Vec<Vec<VertexId>> = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = members.len();
        let mut list = vec![s];
        comp[s] = id;
        let mut i = 0;
        while i < list.len() {
            let v = list[i];
            i += 1;
            for &e in inst.incident(v) {
                let u = inst.other_endpoint(e, v);
                if comp[u] == usize::MAX {
                    comp[u] = id;
                    list.push(u);
                }
            }
        }
        list.sort_unstable();
        members.push(list);
    }
    let mut local = vec![0usize; n];
    for list in &members {
        for (i, &v) in list.iter().enumerate() {
            local[v] = i;
        }
    }
    let mut comp_edges: Vec<Vec<EdgeId>> = vec![Vec::new(); members.len()];
    for (e, &(u, _)) in inst.edges().iter().enumerate() {
        comp_edges[comp[u]].push(e);
    }
    let mut value = 0;
    let mut witness = Vec::new();
    for (list, edges) in members.iter().zip(&comp_edges) {
        let sub = Instance::new(
            list.len(),
            edges
                .iter()
                .map(|&e| {
                    let (u, v) = inst.edge(e);
                    (local[u], local[v])
                })
                .collect(),
            list.iter().map(|&v| inst.bound(v)).collect(),
            None,
        )
        .expect("component of a valid instance");
        let sol = tree_dp(&sub, None)?;
        value += sol.value;
        witness.extend(sol.witness.iter().map(|e| edges[e]));
    }
    Ok(ForestSolution {
        value,
        witness: EdgePacking::from_edges(witness),
        components: members.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_feasible;
    use crate::graph::packing_degrees;
    use crate::harness::generate::random_tree_edges;
    use crate::oracle::exact_opt;
    use num_traits::ToPrimitive;
    use rand::{Rng, SeedableRng};

    fn path3() -> Instance {
        Instance::uniform(3, vec![(0, 1), (1, 2)], 1).unwrap()
    }

    fn oracle_value(inst: &Instance) -> u64 {
        exact_opt(inst).unwrap().value.to_integer().to_u64().unwrap()
    }

    #[test]
    fn rooting() {
        let t = root_tree(&path3(), Some(1)).unwrap();
        assert_eq!(t.children[1], vec![0, 2]);
        assert_eq!(*t.order.last().unwrap(), 1);
        let single = Instance::uniform(1, vec![], 0).unwrap();
        let t = root_tree(&single, None).unwrap();
        assert!(t.children[0].is_empty());
    }

    #[test]
    fn rooting_errors() {
        let tri = crate::graph::fixtures::tri();
        let e = root_tree(&tri, None).unwrap_err();
        assert_eq!(e, TreeError::EdgeCount { n: 3, m: 3 });
        assert!(e.to_string().contains("m ≠ n−1"));
        let cyc = Instance::uniform(4, vec![(0, 1), (1, 2), (2, 0)], 1).unwrap();
        assert_eq!(root_tree(&cyc, None).unwrap_err(), TreeError::Cycle { edge: 1 });
        let par = Instance::uniform(3, vec![(0, 1), (0, 1)], 1).unwrap();
        assert!(matches!(root_tree(&par, None), Err(TreeError::Cycle { .. })));
        assert!(matches!(root_tree(&path3(), Some(7)), Err(TreeError::BadRoot { .. })));
    }

    #[test]
    fn path_rooted_in_middle() {
        let sol = tree_dp(&path3(), Some(1)).unwrap();
        assert_eq!(sol.labels.values(0), (0, 0, 0));
        assert_eq!(sol.labels.values(1), (0, 1, 2));
        assert_eq!(sol.value, 2);
        assert_eq!(sol.witness.len(), 2);
        assert_eq!(oracle_value(&path3()), 2);
    }

    #[test]
    fn single_edge() {
        let inst = Instance::uniform(2, vec![(0, 1)], 1).unwrap();
        let sol = tree_dp(&inst, Some(0)).unwrap();
        assert_eq!(sol.labels.values(0), (0, 1, 1));
        assert_eq!(sol.value, 1);
    }

    #[test]
    fn star_rooted_at_center() {
        let inst = crate::graph::fixtures::star4();
        let sol = tree_dp(&inst, Some(0)).unwrap();
        assert_eq!(sol.labels.values(0), (0, 1, 4));
        assert_eq!(sol.value, 4);
        assert_eq!(sol.witness, EdgePacking::all(&inst));
    }

    #[test]
    fn full_degree_bound_zeroes_g_and_b() {
        // Path 0-1-2 rooted at 0: vertex 1 has d = c = 2 and one child.
        let inst = Instance::new(3, vec![(0, 1), (1, 2)], vec![1, 2, 1], None).unwrap();
        let sol = tree_dp(&inst, Some(0)).unwrap();
        assert_eq!(sol.labels.g[1], None);
        assert_eq!(sol.labels.b[1], None);
        assert_eq!(sol.labels.values(1).1, 0);
    }

    fn random_tree(rng: &mut impl Rng, n: usize) -> Instance {
        let edges = random_tree_edges(n, rng);
        let mut inst = Instance::uniform(n, edges, 0).unwrap();
        let bounds = (0..n)
            .map(|v| {
                let d = inst.degree(v);
                if d == 0 {
                    0
                } else {
                    rng.gen_range(0..=d)
                }
            })
            .collect();
        inst = inst.with_bounds(bounds).unwrap();
        inst
    }

    #[test]
    fn matches_oracle_on_random_trees() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..400 {
            let n = rng.gen_range(1..11);
            let inst = random_tree(&mut rng, n);
            let sol = tree_dp(&inst, None).unwrap();
            assert!(is_feasible(&inst, &sol.witness));
            assert_eq!(sol.witness.len() as u64, sol.value);
            assert_eq!(sol.value, oracle_value(&inst), "{inst:?}");
            // Root choice does not change the optimum.
            for r in 0..n {
                assert_eq!(tree_dp(&inst, Some(r)).unwrap().value, sol.value);
            }
        }
    }

    /// Brute force of the three label definitions on `T(v)`.
    fn brute_labels(inst: &Instance, tree: &RootedTree, v: VertexId) -> [Option<u64>; 3] {
        let mut inside = vec![false; inst.n()];
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            inside[x] = true;
            stack.extend(tree.children[x].iter().copied());
        }
        let edges: Vec<EdgeId> = (0..inst.m())
            .filter(|&e| {
                let (a, b) = inst.edge(e);
                inside[a] && inside[b]
            })
            .collect();
        let c = inst.bound(v);
        let mut best = [None::<u64>; 3];
        for mask in 0u32..(1 << edges.len()) {
            let p: EdgePacking = (0..edges.len())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| edges[i])
                .collect();
            if !is_feasible(inst, &p) {
                continue;
            }
            let deg = packing_degrees(inst, &p);
            let size = Some(p.len() as u64);
            let neighbours_ok = p.iter().all(|e| {
                let (a, b) = inst.edge(e);
                if a == v {
                    deg[b] <= inst.bound(b)
                } else if b == v {
                    deg[a] <= inst.bound(a)
                } else {
                    true
                }
            });
            if deg[v] + 1 <= c {
                best[0] = best[0].max(size);
            }
            if deg[v] == c {
                best[1] = best[1].max(size);
            }
            if deg[v] >= c && neighbours_ok {
                best[2] = best[2].max(size);
            }
        }
        best
    }

    #[test]
    fn labels_match_their_definitions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..150 {
            let n = rng.gen_range(1..10);
            let inst = random_tree(&mut rng, n);
            let root = rng.gen_range(0..n);
            let sol = tree_dp(&inst, Some(root)).unwrap();
            for v in 0..n {
                let want = brute_labels(&inst, &sol.tree, v);
                let got = [sol.labels.h[v], sol.labels.g[v], sol.labels.b[v]];
                assert_eq!(got, want, "vertex {v} of {inst:?} rooted at {root}");
            }
        }
    }

    #[test]
    fn forest_detection() {
        assert!(is_forest(&path3()));
        assert!(!is_forest(&crate::graph::fixtures::tri()));
        assert!(!is_forest(&Instance::uniform(2, vec![(0, 1), (0, 1)], 1).unwrap()));
        assert!(is_forest(&Instance::uniform(4, vec![(0, 1), (2, 3)], 1).unwrap()));
    }

    #[test]
    fn forest_sums_components() {
        let inst = Instance::uniform(5, vec![(0, 1), (2, 3), (3, 4)], 1).unwrap();
        let sol = forest_dp(&inst).unwrap();
        assert_eq!(sol.components, 2);
        assert_eq!(sol.value, 3);
        assert!(is_feasible(&inst, &sol.witness));
        assert_eq!(sol.value, oracle_value(&inst));
    }

    #[test]
    fn large_tree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let inst = random_tree(&mut rng, 20_000);
        let sol = tree_dp(&inst, None).unwrap();
        assert!(is_feasible(&inst, &sol.witness));
        assert_eq!(sol.witness.len() as u64, sol.value);
    }
}
