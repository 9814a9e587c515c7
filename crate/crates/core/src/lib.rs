//! Solvers for partial degree bounded edge packing (PDBEP).
//!
//! Given a graph with a degree bound `c_v` per vertex, choose as many edges
//! (or as much weight) as possible such that every chosen edge has at least
//! one endpoint whose degree in the chosen subgraph stays within its bound.
//!
//! The crate provides:
//!
//! * [`greedy`]: edge addition (factor 4) and edge deletion (factor 2),
//! * [`lp`] and [`rounding`]: an exact rational simplex and iterative
//!   rounding over a penalized relaxation (factor `3/(1-eps)^2`),
//! * [`weighted`]: heavy-set partitioning for weighted edges (factor
//!   `2 + 2 ceil(log2 n)`),
//! * [`tree`]: an exact dynamic program for trees,
//! * [`oracle`]: exhaustive search used as ground truth,
//! * [`harness`]: generators, certified runs and batch certification.

pub mod format;
pub mod graph;
pub mod greedy;
pub mod harness;
pub mod lp;
pub mod oracle;
pub mod rounding;
mod serde_rational;
pub mod tree;
pub mod weighted;

/// Exact rational used for weights, LP values and certified ratios.
pub type Rational = num_rational::BigRational;

pub use format::{parse_instance, serialize_instance, ParseError};
pub use graph::{
    is_feasible, packing_degrees, upper_bound, weighted_upper_bound, EdgeId, EdgePacking,
    Instance, InstanceError, VertexId,
};

/// Shorthand for `a/b` as a [`Rational`].
pub fn ratio(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

pub fn int(a: i64) -> Rational {
    Rational::from_integer(a.into())
}
