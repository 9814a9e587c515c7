//! Linear programming layer: model, exact simplex, and the two relaxations
//! used by the rounding algorithm.
//!
//! The natural relaxation ([`build_lp1`]) picks a fractional "covering"
//! endpoint per vertex and has an integrality gap linear in `n`
//! ([`gap_demo`]). The penalized relaxation ([`build_lp2`]) lets each vertex
//! exceed its residual bound `f_v` by a slack `z_v` priced at `1 + eps`,
//! except for vertices in the closed set `C`, which must stay within bound.

mod model;
mod number;
mod simplex;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use model::{Constraint, LinearProgram, Variable};
pub use simplex::{
    is_corner, solve_extreme, solve_extreme_with, tight_rank, tight_set, ExtremeSolution,
    PivotRule, SimplexConfig, Tight,
};

use crate::graph::{EdgeId, Instance};
use crate::oracle::{exact_opt, DEFAULT_MAX_EDGES};
use crate::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("variable `{0}` has upper bound below lower bound")]
    EmptyRange(String),
    #[error("row `{row}` references unknown variable {index}")]
    UnknownVariable { row: String, index: usize },
    #[error("eps must be positive")]
    NonPositiveEps,
    #[error("expected {expected} entries in `{what}`, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("gap demonstration needs n >= 4, got {0}")]
    GapTooSmall(usize),
}

/// The natural relaxation with variable indices for `x_v` and `y_e`.
#[derive(Debug, Clone)]
pub struct Lp1 {
    pub lp: LinearProgram,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

/// `max sum y_e` s.t. `y_e <= x_u + x_v` and
/// `sum_{e at v} y_e <= c_v x_v + d_v (1 - x_v)`, all variables in `[0, 1]`.
pub fn build_lp1(inst: &Instance) -> Lp1 {
    let mut lp = LinearProgram::new();
    let x: Vec<usize> = (0..inst.n())
        .map(|v| {
            lp.add_variable(format!("x_{v}"), int(0), Some(int(1)), int(0))
                .expect("fresh label")
        })
        .collect();
    let y: Vec<usize> = (0..inst.m())
        .map(|e| {
            lp.add_variable(format!("y_{e}"), int(0), Some(int(1)), int(1))
                .expect("fresh label")
        })
        .collect();
    for (e, &(u, v)) in inst.edges().iter().enumerate() {
        lp.add_constraint(
            format!("cover_{e}"),
            vec![(y[e], int(1)), (x[u], int(-1)), (x[v], int(-1))],
            int(0),
        )
        .expect("fresh label");
    }
    for v in 0..inst.n() {
        let d = inst.degree(v) as i64;
        let c = inst.bound(v) as i64;
        let mut terms: Vec<(usize, Rational)> =
            inst.incident(v).iter().map(|&e| (y[e], int(1))).collect();
        terms.push((x[v], int(d - c)));
        lp.add_constraint(format!("deg_{v}"), terms, int(d))
            .expect("fresh label");
    }
    Lp1 { lp, x, y }
}

/// The penalized relaxation restricted to a set of surviving edges.
#[derive(Debug, Clone)]
pub struct Lp2 {
    pub lp: LinearProgram,
    /// Surviving edges, in the order their `y` variables were created.
    pub edges: Vec<EdgeId>,
    pub y: Vec<usize>,
    /// `z_v` index for non-isolated vertices outside `C`.
    pub z: Vec<Option<usize>>,
    pub eps: Rational,
}

/// LP2 corner optimum mapped back to edges and vertices.
#[derive(Debug, Clone)]
pub struct Lp2Corner {
    /// Aligned with [`Lp2::edges`].
    pub y: Vec<Rational>,
    /// Per vertex; zero where no `z` variable exists.
    pub z: Vec<Rational>,
    pub objective: Rational,
    pub solution: ExtremeSolution,
}

impl Lp2 {
    pub fn solve(&self, config: &SimplexConfig) -> Result<Lp2Corner, LpError> {
        let solution = solve_extreme_with(&self.lp, config)?;
        let y = self.y.iter().map(|&j| solution.values[j].clone()).collect();
        let z = self
            .z
            .iter()
            .map(|j| j.map_or_else(Rational::zero, |j| solution.values[j].clone()))
            .collect();
        Ok(Lp2Corner {
            y,
            z,
            objective: solution.objective.clone(),
            solution,
        })
    }
}

/// LP2 over all edges of `inst`: `max 2 sum y_e - (1+eps) sum_{v not in C} z_v`
/// subject to `sum_{e at v} y_e <= f_v + z_v` (or `<= f_v` for `v in C`),
/// `0 <= y_e <= 1`, `z_v >= 0`.
pub fn build_lp2(
    inst: &Instance,
    closed: &[bool],
    f: &[usize],
    eps: &Rational,
) -> Result<Lp2, LpError> {
    let edges: Vec<EdgeId> = (0..inst.m()).collect();
    build_lp2_on(inst, &edges, closed, f, eps)
}

/// LP2 on the residual graph formed by `edges`; vertices with no surviving
/// edge get no row and no variable. Each `z_v` carries the internal upper
/// bound `|edges|`, which no optimum reaches except when `v` is already at
/// its maximum possible excess.
pub fn build_lp2_on(
    inst: &Instance,
    edges: &[EdgeId],
    closed: &[bool],
    f: &[usize],
    eps: &Rational,
) -> Result<Lp2, LpError> {
    if !eps.is_positive() {
        return Err(LpError::NonPositiveEps);
    }
    for (what, got) in [("closed", closed.len()), ("f", f.len())] {
        if got != inst.n() {
            return Err(LpError::Dimension {
                what,
                expected: inst.n(),
                got,
            });
        }
    }
    let mut lp = LinearProgram::new();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); inst.n()];
    let y: Vec<usize> = edges
        .iter()
        .map(|&e| {
            let idx = lp.add_variable(format!("y_{e}"), int(0), Some(int(1)), int(2))?;
            let (u, v) = inst.edge(e);
            incident[u].push(idx);
            incident[v].push(idx);
            Ok(idx)
        })
        .collect::<Result<_, LpError>>()?;
    let penalty = -(Rational::one() + eps);
    let cap = int(edges.len() as i64);
    let mut z = vec![None; inst.n()];
    for v in 0..inst.n() {
        if incident[v].is_empty() {
            continue;
        }
        let mut terms: Vec<(usize, Rational)> = incident[v].iter().map(|&j| (j, int(1))).collect();
        if !closed[v] {
            let zv = lp.add_variable(format!("z_{v}"), int(0), Some(cap.clone()), penalty.clone())?;
            z[v] = Some(zv);
            terms.push((zv, int(-1)));
        }
        lp.add_constraint(format!("deg_{v}"), terms, int(f[v] as i64))?;
    }
    Ok(Lp2 {
        lp,
        edges: edges.to_vec(),
        y,
        z,
        eps: eps.clone(),
    })
}

/// Outcome of the integrality-gap demonstration on `K_n` with unit bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapReport {
    pub n: usize,
    pub lp1_value: Rational,
    /// Oracle optimum when `K_n` is within the oracle limit, else the
    /// cardinality bound `n`.
    pub ip_bound: Rational,
    pub ip_exact: bool,
}

impl GapReport {
    pub fn ratio(&self) -> Rational {
        &self.lp1_value / &self.ip_bound
    }

    /// The value of the fractional solution used by the gap argument.
    pub fn witness_floor(&self) -> Rational {
        let k = int(self.n as i64 - 1);
        &k * &k / int(4)
    }
}

pub fn complete_graph(n: usize, bound: usize) -> Instance {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j));
        }
    }
    Instance::uniform(n, edges, bound).expect("complete graph is simple")
}

pub fn gap_demo(n: usize) -> Result<GapReport, LpError> {
    gap_demo_with(n, DEFAULT_MAX_EDGES)
}

pub fn gap_demo_with(n: usize, oracle_limit: usize) -> Result<GapReport, LpError> {
    if n < 4 {
        return Err(LpError::GapTooSmall(n));
    }
    let inst = complete_graph(n, 1);
    let lp1 = build_lp1(&inst);
    let sol = solve_extreme(&lp1.lp)?;
    let (ip_bound, ip_exact) = if inst.m() <= oracle_limit {
        let r = exact_opt(&inst).expect("within oracle limit");
        (r.value, true)
    } else {
        (int(crate::graph::upper_bound(&inst) as i64), false)
    };
    Ok(GapReport {
        n,
        lp1_value: sol.objective,
        ip_bound,
        ip_exact,
    })
}

/// The fractional LP1 point from the gap argument: `x = 1/2` everywhere and
/// `y_e = 1` on edges `(i, j)` with `j` within `floor(n/4)` of `i` cyclically.
pub fn gap_witness(inst: &Instance, lp1: &Lp1) -> Vec<Rational> {
    let n = inst.n();
    let reach = n / 4;
    let mut values = vec![Rational::zero(); lp1.lp.num_variables()];
    for &xv in &lp1.x {
        values[xv] = crate::ratio(1, 2);
    }
    for (e, &(i, j)) in inst.edges().iter().enumerate() {
        let gap = (j + n - i) % n;
        let dist = gap.min(n - gap);
        if dist > 0 && dist <= reach {
            values[lp1.y[e]] = int(1);
        }
    }
    values
}
