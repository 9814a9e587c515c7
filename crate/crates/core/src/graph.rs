//! Instance model, edge packings and the degree condition.
//!
//! An [`Instance`] is an undirected multigraph without self-loops, a degree
//! bound per vertex and optional non-negative rational edge weights. Bounds
//! are normalized on construction so that `c_v <= d_v` always holds.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::Rational;

/// Dense 0-based vertex identifier.
pub type VertexId = usize;
/// Dense 0-based edge identifier, assigned in input order.
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("edge {edge} is a self-loop on vertex {vertex}")]
    SelfLoop { edge: EdgeId, vertex: VertexId },
    #[error("edge {edge} references vertex {vertex}, but n = {n}")]
    VertexOutOfRange { edge: EdgeId, vertex: VertexId, n: usize },
    #[error("expected {expected} degree bounds, got {got}")]
    BoundCount { expected: usize, got: usize },
    #[error("expected {expected} edge weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("edge {edge} has negative weight")]
    NegativeWeight { edge: EdgeId },
    #[error("edge {edge} is not an edge of this instance (m = {m})")]
    EdgeOutOfRange { edge: EdgeId, m: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
    bounds: Vec<usize>,
    weights: Option<Vec<Rational>>,
    incident: Vec<Vec<EdgeId>>,
}

impl Instance {
    /// Builds an instance, clamping every bound to the vertex degree.
    pub fn new(
        n: usize,
        edges: Vec<(VertexId, VertexId)>,
        bounds: Vec<usize>,
        weights: Option<Vec<Rational>>,
    ) -> Result<Self, InstanceError> {
        if bounds.len() != n {
            return Err(InstanceError::BoundCount {
                expected: n,
                got: bounds.len(),
            });
        }
        let mut incident = vec![Vec::new(); n];
        for (id, &(u, v)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x >= n {
                    return Err(InstanceError::VertexOutOfRange {
                        edge: id,
                        vertex: x,
                        n,
                    });
                }
            }
            if u == v {
                return Err(InstanceError::SelfLoop { edge: id, vertex: u });
            }
            incident[u].push(id);
            incident[v].push(id);
        }
        if let Some(w) = &weights {
            if w.len() != edges.len() {
                return Err(InstanceError::WeightCount {
                    expected: edges.len(),
                    got: w.len(),
                });
            }
            if let Some(edge) = w.iter().position(|x| x < &Rational::zero()) {
                return Err(InstanceError::NegativeWeight { edge });
            }
        }
        // Without edges there is nothing to weigh.
        let weights = weights.filter(|_| !edges.is_empty());
        let mut inst = Self {
            n,
            edges,
            bounds,
            weights,
            incident,
        };
        inst.normalize();
        Ok(inst)
    }

    /// Instance with every bound equal to `bound` (clamped to degree).
    pub fn uniform(
        n: usize,
        edges: Vec<(VertexId, VertexId)>,
        bound: usize,
    ) -> Result<Self, InstanceError> {
        Self::new(n, edges, vec![bound; n], None)
    }

    fn normalize(&mut self) {
        for v in 0..self.n {
            self.bounds[v] = self.bounds[v].min(self.incident[v].len());
        }
    }

    /// Returns a copy with bounds clamped to degrees. Construction already
    /// normalizes, so this is the identity on any `Instance`.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        out.normalize();
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    pub fn bound(&self, v: VertexId) -> usize {
        self.bounds[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incident[v].len()
    }

    /// Incident edges of `v` in increasing EdgeId order.
    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v]
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn weights(&self) -> Option<&[Rational]> {
        self.weights.as_deref()
    }

    /// Weight of `e`; unweighted instances use unit weights.
    pub fn weight(&self, e: EdgeId) -> Rational {
        match &self.weights {
            Some(w) => w[e].clone(),
            None => Rational::one(),
        }
    }

    /// Same graph and bounds with the weights dropped.
    pub fn unweighted(&self) -> Self {
        Self {
            weights: None,
            ..self.clone()
        }
    }

    /// Same graph and bounds with explicit weights attached.
    pub fn with_weights(&self, weights: Vec<Rational>) -> Result<Self, InstanceError> {
        Self::new(self.n, self.edges.clone(), self.bounds.clone(), Some(weights))
    }

    /// Same graph with new bounds (normalized).
    pub fn with_bounds(&self, bounds: Vec<usize>) -> Result<Self, InstanceError> {
        Self::new(self.n, self.edges.clone(), bounds, self.weights.clone())
    }

    pub fn other_endpoint(&self, e: EdgeId, v: VertexId) -> VertexId {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }
}

/// A set of edges of some instance, kept sorted and duplicate-free.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct EdgePacking {
    edges: Vec<EdgeId>,
}

impl EdgePacking {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Every edge of `inst`.
    pub fn all(inst: &Instance) -> Self {
        Self {
            edges: (0..inst.m()).collect(),
        }
    }

    pub fn from_edges<I: IntoIterator<Item = EdgeId>>(edges: I) -> Self {
        let mut edges: Vec<EdgeId> = edges.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        Self { edges }
    }

    /// Like [`EdgePacking::from_edges`] but checks every id against `inst`.
    pub fn for_instance<I: IntoIterator<Item = EdgeId>>(
        inst: &Instance,
        edges: I,
    ) -> Result<Self, InstanceError> {
        let p = Self::from_edges(edges);
        if let Some(&edge) = p.edges.iter().find(|&&e| e >= inst.m()) {
            return Err(InstanceError::EdgeOutOfRange { edge, m: inst.m() });
        }
        Ok(p)
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self {
            edges: mask
                .iter()
                .enumerate()
                .filter_map(|(e, &b)| b.then_some(e))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().copied()
    }

    pub fn as_slice(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn mask(&self, m: usize) -> Vec<bool> {
        let mut mask = vec![false; m];
        for &e in &self.edges {
            mask[e] = true;
        }
        mask
    }

    pub fn weight(&self, inst: &Instance) -> Rational {
        match inst.weights() {
            Some(w) => self.edges.iter().map(|&e| &w[e]).sum(),
            None => Rational::from_integer(self.edges.len().into()),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_edges(self.iter().chain(other.iter()))
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.iter().all(|e| !other.contains(e))
    }
}

impl FromIterator<EdgeId> for EdgePacking {
    fn from_iter<I: IntoIterator<Item = EdgeId>>(iter: I) -> Self {
        Self::from_edges(iter)
    }
}

/// Degree of every vertex in the subgraph formed by `p`.
pub fn packing_degrees(inst: &Instance, p: &EdgePacking) -> Vec<usize> {
    let mut deg = vec![0; inst.n()];
    for e in p.iter() {
        let (u, v) = inst.edge(e);
        deg[u] += 1;
        deg[v] += 1;
    }
    deg
}

/// Checks the degree condition: every chosen edge has an endpoint whose
/// packing degree is within its bound.
pub fn is_feasible(inst: &Instance, p: &EdgePacking) -> bool {
    let deg = packing_degrees(inst, p);
    p.iter().all(|e| {
        let (u, v) = inst.edge(e);
        deg[u] <= inst.bound(u) || deg[v] <= inst.bound(v)
    })
}

/// Edges of `p` whose endpoints both exceed their bounds.
pub fn violations(inst: &Instance, p: &EdgePacking) -> Vec<EdgeId> {
    let deg = packing_degrees(inst, p);
    p.iter()
        .filter(|&e| {
            let (u, v) = inst.edge(e);
            deg[u] > inst.bound(u) && deg[v] > inst.bound(v)
        })
        .collect()
}

/// Sum of all degree bounds; no feasible packing has more edges, since the
/// vertices within their bounds cover every chosen edge.
pub fn upper_bound(inst: &Instance) -> u64 {
    inst.bounds().iter().map(|&c| c as u64).sum()
}

/// Sum over vertices of the weight of the vertex's heavy set.
pub fn weighted_upper_bound(inst: &Instance) -> Rational {
    let heavy = crate::weighted::heavy_sets(inst);
    (0..inst.n())
        .flat_map(|v| heavy.of(v).iter().map(|&e| inst.weight(e)))
        .sum()
}
