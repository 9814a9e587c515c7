//! Single certified solver runs.

use std::borrow::Cow;
use std::cell::OnceCell;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::format::{format_rational, serialize_instance};
use crate::graph::{
    is_feasible, upper_bound, weighted_upper_bound, EdgeId, EdgePacking, Instance, VertexId,
};
use crate::greedy::{edge_addition, edge_deletion, EdgeOrder};
use crate::oracle::{exact_opt_with, OracleConfig, OracleError};
use crate::rounding::{default_eps, solve_ip2, RoundingError};
use crate::tree::{forest_dp, is_forest, tree_dp, TreeError};
use crate::weighted::{bit_count, partition_solve_labeled};
use crate::{int, Rational};

use super::{strip_timing, REPORT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Add,
    Delete,
    Round,
    Weighted,
    Tree,
    Exact,
    Auto,
}

impl Solver {
    pub const ALL: [Solver; 7] = [
        Solver::Add,
        Solver::Delete,
        Solver::Round,
        Solver::Weighted,
        Solver::Tree,
        Solver::Exact,
        Solver::Auto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Add => "add",
            Solver::Delete => "delete",
            Solver::Round => "round",
            Solver::Weighted => "weighted",
            Solver::Tree => "tree",
            Solver::Exact => "exact",
            Solver::Auto => "auto",
        }
    }

    /// Tree solver for forests, weighted solver when weights are present,
    /// edge deletion otherwise.
    pub fn resolve(self, inst: &Instance) -> Solver {
        match self {
            Solver::Auto if inst.is_weighted() => Solver::Weighted,
            Solver::Auto if is_forest(inst) => Solver::Tree,
            Solver::Auto => Solver::Delete,
            s => s,
        }
    }

    /// Whether the solver optimizes weight rather than cardinality.
    pub fn uses_weights(self) -> bool {
        matches!(self, Solver::Weighted | Solver::Exact)
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Solver::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown solver `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunParams {
    pub eps: Rational,
    /// Shuffle the greedy edge order with this seed.
    pub order_seed: Option<u64>,
    /// Root for the tree solver; the instance must then be a single tree.
    pub root: Option<VertexId>,
    /// Shuffle the vertex labels of the weighted solver with this seed.
    pub relabel_seed: Option<u64>,
    pub oracle: OracleConfig,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            eps: default_eps(),
            order_seed: None,
            root: None,
            relabel_seed: None,
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Oracle,
    /// `sum_v c_v`.
    DegreeSum,
    /// `sum_v w(H(v))`.
    HeavySet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamReport {
    #[serde(with = "crate::serde_rational::option")]
    pub eps: Option<Rational>,
    pub order_seed: Option<u64>,
    pub root: Option<VertexId>,
    pub relabel_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub version: u32,
    /// SHA-256 of the canonical instance text.
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub requested: Solver,
    pub solver: Solver,
    pub params: ParamReport,
    #[serde(with = "crate::serde_rational")]
    pub value: Rational,
    pub size: usize,
    /// Recomputed from the witness, independent of the solver.
    pub feasible: bool,
    /// The value does not exceed the degree-sum (or heavy-set) bound.
    pub within_upper_bound: bool,
    pub bound_kind: BoundKind,
    #[serde(with = "crate::serde_rational")]
    pub bound: Rational,
    /// `bound / value`; absent when the value is 0 but the bound is not.
    #[serde(with = "crate::serde_rational::option")]
    pub ratio: Option<Rational>,
    /// Proven factor of the solver, if any.
    #[serde(with = "crate::serde_rational::option")]
    pub guarantee: Option<Rational>,
    /// `ratio <= guarantee`; absent when the bound in use does not support
    /// the check.
    pub certified: Option<bool>,
    pub witness: Vec<EdgeId>,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.feasible && self.within_upper_bound && self.certified != Some(false)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// JSON with timing fields removed, for byte-level comparisons.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        strip_timing(&mut v);
        v.to_string()
    }

    /// Short reason for a failed run.
    pub fn failure(&self) -> Option<String> {
        if !self.feasible {
            Some("infeasible output".into())
        } else if !self.within_upper_bound {
            Some(format!("value {} exceeds upper bound", format_rational(&self.value)))
        } else if self.certified == Some(false) {
            Some(format!(
                "ratio {} exceeds guarantee {}",
                self.ratio.as_ref().map_or("inf".into(), format_rational),
                self.guarantee.as_ref().map_or("-".into(), format_rational)
            ))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("tree solver: {0}")]
    Tree(#[from] TreeError),
    #[error("exact solver: {0}")]
    Oracle(#[from] OracleError),
    #[error("rounding: {0}")]
    Rounding(#[from] RoundingError),
}

/// Vertex labels for the weighted solver: identity, or a seeded shuffle.
pub fn relabeling(n: usize, seed: Option<u64>) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).collect();
    if let Some(s) = seed {
        labels.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
    }
    labels
}

pub fn instance_digest(inst: &Instance) -> String {
    hex::encode(Sha256::digest(serialize_instance(inst).as_bytes()))
}

/// Instance whose objective a solver optimizes: cardinality solvers see
/// unit weights.
pub fn objective_instance(inst: &Instance, solver: Solver) -> Cow<'_, Instance> {
    if inst.is_weighted() && !solver.resolve(inst).uses_weights() {
        Cow::Owned(inst.unweighted())
    } else {
        Cow::Borrowed(inst)
    }
}

/// Oracle optima computed on demand and shared between the runs on one
/// instance.
pub struct References<'a> {
    inst: &'a Instance,
    config: OracleConfig,
    cardinality: OnceCell<Option<Rational>>,
    weight: OnceCell<Option<Rational>>,
}

impl<'a> References<'a> {
    pub fn new(inst: &'a Instance, config: OracleConfig) -> Self {
        Self {
            inst,
            config,
            cardinality: OnceCell::new(),
            weight: OnceCell::new(),
        }
    }

    /// Exact optimum for the objective of `solver`, if within the oracle limit.
    pub fn optimum(&self, solver: Solver) -> Option<&Rational> {
        let weighted = self.inst.is_weighted() && solver.resolve(self.inst).uses_weights();
        let cell = if weighted {
            &self.weight
        } else {
            &self.cardinality
        };
        cell.get_or_init(|| {
            let obj = objective_instance(self.inst, solver);
            exact_opt_with(&obj, &self.config).ok().map(|r| r.value)
        })
        .as_ref()
    }
}

pub fn run(inst: &Instance, solver: Solver, params: &RunParams) -> Result<RunReport, RunError> {
    run_with(inst, solver, params, &References::new(inst, params.oracle))
}

pub fn run_with(
    inst: &Instance,
    requested: Solver,
    params: &RunParams,
    refs: &References<'_>,
) -> Result<RunReport, RunError> {
    let solver = requested.resolve(inst);
    let obj = objective_instance(inst, solver);
    let obj: &Instance = &obj;
    let start = Instant::now();
    let (witness, guarantee) = solve(obj, solver, params)?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;

    let feasible = is_feasible(obj, &witness);
    let value = witness.weight(obj);
    let (static_kind, static_bound) = if obj.is_weighted() {
        (BoundKind::HeavySet, weighted_upper_bound(obj))
    } else {
        (BoundKind::DegreeSum, int(upper_bound(obj) as i64))
    };
    let within_upper_bound = value <= static_bound;
    let (bound_kind, bound) = match refs.optimum(requested) {
        Some(opt) => (BoundKind::Oracle, opt.clone()),
        None => (static_kind, static_bound),
    };
    let ratio = if value.is_zero() {
        bound.is_zero().then(Rational::one)
    } else {
        Some(&bound / &value)
    };
    // The greedy and partition proofs bound the static bound itself; the
    // other guarantees are relative to the optimum.
    let checkable =
        bound_kind == BoundKind::Oracle || matches!(solver, Solver::Add | Solver::Delete | Solver::Weighted);
    let certified = match (&guarantee, checkable) {
        (Some(g), true) => Some(ratio.as_ref().is_some_and(|r| r <= g)),
        _ => None,
    };
    Ok(RunReport {
        version: REPORT_VERSION,
        instance: instance_digest(inst),
        n: inst.n(),
        m: inst.m(),
        requested,
        solver,
        params: ParamReport {
            eps: (solver == Solver::Round).then(|| params.eps.clone()),
            order_seed: matches!(solver, Solver::Add | Solver::Delete)
                .then_some(params.order_seed)
                .flatten(),
            root: (solver == Solver::Tree).then_some(params.root).flatten(),
            relabel_seed: (solver == Solver::Weighted)
                .then_some(params.relabel_seed)
                .flatten(),
        },
        value,
        size: witness.len(),
        feasible,
        within_upper_bound,
        bound_kind,
        bound,
        ratio,
        guarantee,
        certified,
        witness: witness.as_slice().to_vec(),
        wall_time_ms,
    })
}

/// Runs a resolved solver, returning its output and proven factor.
fn solve(
    inst: &Instance,
    solver: Solver,
    params: &RunParams,
) -> Result<(EdgePacking, Option<Rational>), RunError> {
    let order = params.order_seed.map(|s| EdgeOrder::seeded(inst.m(), s));
    Ok(match solver {
        Solver::Add => (edge_addition(inst, order.as_ref()).0, Some(int(4))),
        Solver::Delete => (edge_deletion(inst, order.as_ref()), Some(int(2))),
        Solver::Round => {
            let (out, _) = solve_ip2(inst, &params.eps)?;
            let keep = Rational::one() - &params.eps;
            let g = keep.is_positive().then(|| int(3) / (&keep * &keep));
            (out, g)
        }
        Solver::Weighted => {
            let sol = partition_solve_labeled(inst, &relabeling(inst.n(), params.relabel_seed));
            (sol.output, Some(int(2 + 2 * bit_count(inst.n()) as i64)))
        }
        Solver::Tree => {
            let out = match params.root {
                Some(r) => tree_dp(inst, Some(r))?.witness,
                None => forest_dp(inst)?.witness,
            };
            (out, Some(Rational::one()))
        }
        Solver::Exact => (exact_opt_with(inst, &params.oracle)?.witness, Some(Rational::one())),
        Solver::Auto => unreachable!("resolved above"),
    })
}
