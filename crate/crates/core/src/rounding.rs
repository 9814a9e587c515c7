//! Iterative rounding over the penalized relaxation.
//!
//! Starting from `f = c` and an empty closed set `C`, each round solves LP2
//! on the residual graph. Edges at `y_e = 0` are discarded (all at once in
//! batched mode). Otherwise some edge has `y_e >= 1/2`, and one of its
//! endpoints `v` has `f_v > 0` and `z_v = 0`; the edge is accepted, `v` is
//! closed with `f_v` decremented, and the other endpoint's residual bound
//! is decremented if positive. The accepted set is finally pushed to a
//! local optimum of `phi` under single-edge moves, which makes it feasible.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::graph::{packing_degrees, EdgeId, EdgePacking, Instance, VertexId};
use crate::lp::{build_lp2_on, is_corner, LpError, SimplexConfig};
use crate::{int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoundingError {
    #[error("eps must be positive")]
    NonPositiveEps,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("round {round}: corner has no edge with y = 0 or y >= 1/2")]
    NoRoundableEdge { round: usize },
    #[error("round {round}: neither endpoint of edge {edge} has f > 0 and z = 0")]
    NoEligibleEndpoint { round: usize, edge: EdgeId },
    #[error("round {round}: simplex returned a point that is not a corner")]
    NotACorner { round: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundingConfig {
    pub simplex: SimplexConfig,
    /// Drop every zero edge of a corner at once instead of one per solve.
    pub batch_zeros: bool,
    /// Apply [`make_maximal`] to the rounded set.
    pub repair: bool,
    /// Re-verify each corner by exact rank computation (slow).
    pub verify_corners: bool,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        Self {
            simplex: SimplexConfig::default(),
            batch_zeros: true,
            repair: true,
            verify_corners: false,
        }
    }
}

pub fn default_eps() -> Rational {
    ratio(1, 100)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundedEdge {
    pub edge: EdgeId,
    #[serde(with = "crate::serde_rational")]
    pub y: Rational,
    /// Endpoint that was closed.
    pub endpoint: VertexId,
    pub other: VertexId,
    /// Residual bounds and slacks at selection time.
    pub f_endpoint: usize,
    pub f_other: usize,
    #[serde(with = "crate::serde_rational")]
    pub z_endpoint: Rational,
    #[serde(with = "crate::serde_rational")]
    pub z_other: Rational,
}

/// One LP solve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundLog {
    pub round: usize,
    pub residual_edges: usize,
    #[serde(with = "crate::serde_rational")]
    pub lp_objective: Rational,
    pub pivots: usize,
    pub zeroed: Vec<EdgeId>,
    pub rounded: Option<RoundedEdge>,
    /// Some edge had `y = 0` or `y >= 1/2`.
    pub half_or_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundingState {
    pub residual: Vec<EdgeId>,
    pub closed: Vec<bool>,
    pub f: Vec<usize>,
    /// Edges accepted by rounding, before repair.
    pub accepted: EdgePacking,
    pub rounds: Vec<RoundLog>,
    /// Optimum of LP2 on the full instance.
    pub root_objective: Rational,
}

pub fn solve_ip2(
    inst: &Instance,
    eps: &Rational,
) -> Result<(EdgePacking, RoundingState), RoundingError> {
    solve_ip2_with(inst, eps, &RoundingConfig::default())
}

pub fn solve_ip2_with(
    inst: &Instance,
    eps: &Rational,
    config: &RoundingConfig,
) -> Result<(EdgePacking, RoundingState), RoundingError> {
    if !eps.is_positive() {
        return Err(RoundingError::NonPositiveEps);
    }
    let half = ratio(1, 2);
    let mut f: Vec<usize> = inst.bounds().to_vec();
    let mut closed = vec![false; inst.n()];
    let mut residual: Vec<EdgeId> = (0..inst.m()).collect();
    let mut accepted = Vec::new();
    let mut rounds = Vec::new();
    let mut root_objective = Rational::zero();

    while !residual.is_empty() {
        let round = rounds.len();
        let lp2 = build_lp2_on(inst, &residual, &closed, &f, eps)?;
        let corner = lp2.solve(&config.simplex)?;
        if config.verify_corners && !is_corner(&lp2.lp, &corner.solution.values) {
            return Err(RoundingError::NotACorner { round });
        }
        if round == 0 {
            root_objective = corner.objective.clone();
        }
        let half_or_zero = corner.y.iter().any(|y| y.is_zero() || y >= &half);
        let mut log = RoundLog {
            round,
            residual_edges: residual.len(),
            lp_objective: corner.objective.clone(),
            pivots: corner.solution.pivots,
            zeroed: Vec::new(),
            rounded: None,
            half_or_zero,
        };

        let zeros: Vec<usize> = (0..residual.len())
            .filter(|&k| corner.y[k].is_zero())
            .collect();
        if !zeros.is_empty() {
            let take = if config.batch_zeros { zeros.len() } else { 1 };
            let drop: Vec<EdgeId> = zeros[..take].iter().map(|&k| residual[k]).collect();
            residual.retain(|e| !drop.contains(e));
            log.zeroed = drop;
            rounds.push(log);
            continue;
        }

        let k = (0..residual.len())
            .find(|&k| corner.y[k] >= half)
            .ok_or(RoundingError::NoRoundableEdge { round })?;
        let edge = residual[k];
        let (a, b) = inst.edge(edge);
        let eligible = |x: VertexId| f[x] > 0 && corner.z[x].is_zero();
        let endpoint = match (eligible(a), eligible(b)) {
            (true, true) => {
                // Larger residual bound, then smaller id.
                if (f[b], std::cmp::Reverse(b)) > (f[a], std::cmp::Reverse(a)) {
                    b
                } else {
                    a
                }
            }
            (true, false) => a,
            (false, true) => b,
            (false, false) => return Err(RoundingError::NoEligibleEndpoint { round, edge }),
        };
        let other = if endpoint == a { b } else { a };
        log.rounded = Some(RoundedEdge {
            edge,
            y: corner.y[k].clone(),
            endpoint,
            other,
            f_endpoint: f[endpoint],
            f_other: f[other],
            z_endpoint: corner.z[endpoint].clone(),
            z_other: corner.z[other].clone(),
        });
        f[endpoint] -= 1;
        closed[endpoint] = true;
        f[other] = f[other].saturating_sub(1);
        residual.remove(k);
        accepted.push(edge);
        rounds.push(log);
    }

    if config.batch_zeros && rounds.len() > inst.n() + 1 {
        log::warn!(
            "rounding used {} LP solves, more than |V| + 1 = {}",
            rounds.len(),
            inst.n() + 1
        );
    }
    let accepted = EdgePacking::from_edges(accepted);
    let output = if config.repair {
        make_maximal(inst, &accepted, eps)
    } else {
        accepted.clone()
    };
    Ok((
        output,
        RoundingState {
            residual,
            closed,
            f,
            accepted,
            rounds,
            root_objective,
        },
    ))
}

/// `2|p| - (1+eps) * sum_v max(0, d'_v - c_v)`.
pub fn phi_value(inst: &Instance, p: &EdgePacking, eps: &Rational) -> Rational {
    let deg = packing_degrees(inst, p);
    let excess: usize = (0..inst.n())
        .map(|v| deg[v].saturating_sub(inst.bound(v)))
        .sum();
    int(2 * p.len() as i64) - (Rational::one() + eps) * int(excess as i64)
}

/// Applies improving single-edge removals and additions (in EdgeId order,
/// removals first) until neither kind of move raises `phi`.
pub fn make_maximal(inst: &Instance, p: &EdgePacking, eps: &Rational) -> EdgePacking {
    let penalty = Rational::one() + eps;
    let two = int(2);
    let mut member = p.mask(inst.m());
    let mut deg = packing_degrees(inst, p);
    loop {
        let mut changed = false;
        for e in 0..inst.m() {
            if !member[e] {
                continue;
            }
            let (u, v) = inst.edge(e);
            let relieved = [u, v].iter().filter(|&&x| deg[x] > inst.bound(x)).count();
            if &penalty * int(relieved as i64) > two {
                member[e] = false;
                deg[u] -= 1;
                deg[v] -= 1;
                changed = true;
            }
        }
        for e in 0..inst.m() {
            if member[e] {
                continue;
            }
            let (u, v) = inst.edge(e);
            let pushed = [u, v].iter().filter(|&&x| deg[x] >= inst.bound(x)).count();
            if &penalty * int(pushed as i64) < two {
                member[e] = true;
                deg[u] += 1;
                deg[v] += 1;
                changed = true;
            }
        }
        if !changed {
            return EdgePacking::from_mask(&member);
        }
    }
}

/// The first rounded edge whose closed endpoint violated `f > 0, z = 0`.
pub fn endpoint_condition_violation(state: &RoundingState) -> Option<&RoundedEdge> {
    state
        .rounds
        .iter()
        .filter_map(|r| r.rounded.as_ref())
        .find(|r| r.f_endpoint == 0 || !r.z_endpoint.is_zero())
}
