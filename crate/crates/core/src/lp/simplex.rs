//! Bounded-variable primal simplex over exact rationals.
//!
//! Variables are shifted to `0 <= x' <= u - l`; each row gets a slack, and
//! rows whose shifted right-hand side is negative get an artificial for a
//! phase-one start. Nonbasic variables sit at either bound. The result is a
//! basic feasible optimum together with the set of tight constraints that
//! define it as a vertex of the feasible region.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::model::LinearProgram;
use super::number::Q;
use super::LpError;
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PivotRule {
    /// Smallest-index entering and leaving variable throughout.
    Bland,
    /// Largest reduced cost, falling back to smallest-index after a run of
    /// degenerate pivots until the next strictly improving step.
    #[default]
    DantzigBland,
}

/// Consecutive degenerate pivots tolerated before switching to Bland.
const DEGENERATE_RUN: usize = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimplexConfig {
    pub pivot: PivotRule,
}

/// A constraint or bound that holds with equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Tight {
    Row(usize),
    Lower(usize),
    Upper(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremeSolution {
    pub values: Vec<Rational>,
    pub objective: Rational,
    /// Linearly independent tight constraints, one per variable.
    pub basis: Vec<Tight>,
    pub pivots: usize,
}

pub fn solve_extreme(lp: &LinearProgram) -> Result<ExtremeSolution, LpError> {
    solve_extreme_with(lp, &SimplexConfig::default())
}

pub fn solve_extreme_with(
    lp: &LinearProgram,
    config: &SimplexConfig,
) -> Result<ExtremeSolution, LpError> {
    let mut tab = Tableau::build(lp);
    if tab.artificials > 0 {
        let cost: Vec<Q> = (0..tab.cols)
            .map(|j| {
                if tab.is_artificial(j) {
                    -&Q::one()
                } else {
                    Q::zero()
                }
            })
            .collect();
        tab.optimize(&cost, config.pivot, true)
            .map_err(|_| LpError::Infeasible)?;
        let infeasibility = (0..tab.rows)
            .filter(|&i| tab.is_artificial(tab.basis[i]))
            .fold(Q::zero(), |acc, i| &acc + &tab.beta[i]);
        if infeasibility.is_positive() {
            return Err(LpError::Infeasible);
        }
        tab.retire_artificials();
    }
    let cost = tab.phase_two_cost(lp);
    tab.optimize(&cost, config.pivot, false)?;
    let values = tab.values(lp);
    let basis = match tab.defining_set() {
        Some(b) => b,
        None => independent_subset(lp, &tight_set(lp, &values)),
    };
    Ok(ExtremeSolution {
        objective: lp.evaluate(&values),
        values,
        basis,
        pivots: tab.pivots,
    })
}

/// Every row and bound satisfied with equality at `values`.
pub fn tight_set(lp: &LinearProgram, values: &[Rational]) -> Vec<Tight> {
    let mut out = Vec::new();
    for i in 0..lp.num_constraints() {
        if lp.row_activity(i, values) == lp.constraints()[i].rhs {
            out.push(Tight::Row(i));
        }
    }
    for (j, v) in lp.variables().iter().enumerate() {
        if values[j] == v.lower {
            out.push(Tight::Lower(j));
        }
        if v.upper.as_ref() == Some(&values[j]) {
            out.push(Tight::Upper(j));
        }
    }
    out
}

fn tight_row(lp: &LinearProgram, t: Tight) -> Vec<Rational> {
    let mut row = vec![Rational::zero(); lp.num_variables()];
    match t {
        Tight::Row(i) => {
            for (j, a) in &lp.constraints()[i].terms {
                row[*j] = a.clone();
            }
        }
        Tight::Lower(j) | Tight::Upper(j) => row[j] = Rational::one(),
    }
    row
}

/// Greedy exact elimination; keeps each constraint that raises the rank.
fn independent_subset(lp: &LinearProgram, tight: &[Tight]) -> Vec<Tight> {
    let mut reduced: Vec<(usize, Vec<Rational>)> = Vec::new();
    let mut keep = Vec::new();
    for &t in tight {
        let mut row = tight_row(lp, t);
        for (pivot, basis_row) in &reduced {
            if !row[*pivot].is_zero() {
                let f = row[*pivot].clone();
                for (x, b) in row.iter_mut().zip(basis_row) {
                    if !b.is_zero() {
                        *x -= &f * b;
                    }
                }
            }
        }
        if let Some(p) = row.iter().position(|x| !x.is_zero()) {
            let inv = row[p].recip();
            for x in row.iter_mut() {
                *x *= &inv;
            }
            reduced.push((p, row));
            keep.push(t);
        }
    }
    keep
}

/// Rank of the given tight constraints, by exact elimination.
pub fn tight_rank(lp: &LinearProgram, tight: &[Tight]) -> usize {
    independent_subset(lp, tight).len()
}

/// True iff `sol` is feasible and its tight constraints have full rank.
pub fn is_corner(lp: &LinearProgram, values: &[Rational]) -> bool {
    lp.is_feasible(values) && tight_rank(lp, &tight_set(lp, values)) == lp.num_variables()
}

struct Tableau {
    rows: usize,
    cols: usize,
    structural: usize,
    artificials: usize,
    /// `B^-1 A` in full.
    a: Vec<Vec<Q>>,
    /// Current basic values (shifted).
    beta: Vec<Q>,
    basis: Vec<usize>,
    basic_row: Vec<Option<usize>>,
    /// Shifted upper bound per column.
    upper: Vec<Option<Q>>,
    at_upper: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let rows = lp.num_constraints();
        let structural = lp.num_variables();
        let lower: Vec<&Rational> = lp.variables().iter().map(|v| &v.lower).collect();
        let shifted_rhs: Vec<Rational> = lp
            .constraints()
            .iter()
            .map(|c| {
                c.terms
                    .iter()
                    .fold(c.rhs.clone(), |acc, (j, a)| acc - a * lower[*j])
            })
            .collect();
        let negative: Vec<usize> = (0..rows).filter(|&i| shifted_rhs[i].is_negative()).collect();
        let artificials = negative.len();
        let cols = structural + rows + artificials;

        let mut a = vec![vec![Q::zero(); cols]; rows];
        let mut beta = Vec::with_capacity(rows);
        let mut basis = Vec::with_capacity(rows);
        let mut art = structural + rows;
        for (i, c) in lp.constraints().iter().enumerate() {
            let flip = shifted_rhs[i].is_negative();
            for (j, coeff) in &c.terms {
                a[i][*j] = Q::from_rational(&if flip { -coeff } else { coeff.clone() });
            }
            a[i][structural + i] = if flip { -&Q::one() } else { Q::one() };
            if flip {
                a[i][art] = Q::one();
                basis.push(art);
                art += 1;
                beta.push(Q::from_rational(&-&shifted_rhs[i]));
            } else {
                basis.push(structural + i);
                beta.push(Q::from_rational(&shifted_rhs[i]));
            }
        }

        let mut upper: Vec<Option<Q>> = lp
            .variables()
            .iter()
            .map(|v| v.upper.as_ref().map(|u| Q::from_rational(&(u - &v.lower))))
            .collect();
        upper.extend(std::iter::repeat(None).take(rows + artificials));
        let mut basic_row = vec![None; cols];
        for (i, &b) in basis.iter().enumerate() {
            basic_row[b] = Some(i);
        }
        Self {
            rows,
            cols,
            structural,
            artificials,
            a,
            beta,
            basis,
            basic_row,
            upper,
            at_upper: vec![false; cols],
            pivots: 0,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.structural + self.rows
    }

    fn nonbasic_value(&self, j: usize) -> Q {
        if self.at_upper[j] {
            self.upper[j].clone().expect("at upper implies finite bound")
        } else {
            Q::zero()
        }
    }

    /// Pins artificials to zero and pivots basic ones out where possible.
    fn retire_artificials(&mut self) {
        for j in self.structural + self.rows..self.cols {
            self.upper[j] = Some(Q::zero());
            self.at_upper[j] = false;
            if let Some(r) = self.basic_row[j] {
                if let Some(k) = (0..self.structural + self.rows)
                    .find(|&k| self.basic_row[k].is_none() && !self.a[r][k].is_zero())
                {
                    // Degenerate: the artificial sits at zero.
                    self.pivot(r, k, self.nonbasic_value(k));
                }
            }
        }
    }

    fn phase_two_cost(&self, lp: &LinearProgram) -> Vec<Q> {
        let mut cost = vec![Q::zero(); self.cols];
        for (c, o) in cost.iter_mut().zip(lp.objective()) {
            *c = Q::from_rational(o);
        }
        cost
    }

    fn reduced_costs(&self, cost: &[Q]) -> Vec<Q> {
        let mut d = cost.to_vec();
        for i in 0..self.rows {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (dj, aij) in d.iter_mut().zip(&self.a[i]) {
                if !aij.is_zero() {
                    dj.sub_mul(cb, aij);
                }
            }
        }
        d
    }

    fn optimize(&mut self, cost: &[Q], rule: PivotRule, phase_one: bool) -> Result<(), LpError> {
        let mut d = self.reduced_costs(cost);
        let mut degenerate_run = 0usize;
        loop {
            let bland = rule == PivotRule::Bland || degenerate_run >= DEGENERATE_RUN;
            let Some(j) = self.entering(&d, bland, phase_one) else {
                return Ok(());
            };
            // Entering increases from its lower bound or decreases from its upper.
            let increase = !self.at_upper[j];
            let (step, leave) = self.ratio_test(j, increase)?;
            if step.is_zero() {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivots += 1;
            let signed_step = if increase { step.clone() } else { -&step };
            match leave {
                None => {
                    for i in 0..self.rows {
                        if !self.a[i][j].is_zero() {
                            let aij = self.a[i][j].clone();
                            self.beta[i].sub_mul(&aij, &signed_step);
                        }
                    }
                    self.at_upper[j] = increase;
                }
                Some((r, to_upper)) => {
                    for i in 0..self.rows {
                        if i != r && !self.a[i][j].is_zero() {
                            let aij = self.a[i][j].clone();
                            self.beta[i].sub_mul(&aij, &signed_step);
                        }
                    }
                    let entering_value = if increase {
                        step
                    } else {
                        &self.nonbasic_value(j) - &step
                    };
                    let leaving = self.basis[r];
                    self.pivot(r, j, entering_value);
                    self.at_upper[leaving] = to_upper;
                    let f = d[j].clone();
                    if !f.is_zero() {
                        for (dk, ark) in d.iter_mut().zip(&self.a[r]) {
                            if !ark.is_zero() {
                                dk.sub_mul(&f, ark);
                            }
                        }
                    }
                }
            }
        }
    }

    fn entering(&self, d: &[Q], bland: bool, phase_one: bool) -> Option<usize> {
        let mut best: Option<(usize, Q)> = None;
        for j in 0..self.cols {
            if self.basic_row[j].is_some() || (!phase_one && self.is_artificial(j)) {
                continue;
            }
            if self.upper[j].as_ref().is_some_and(|u| u.is_zero()) {
                continue;
            }
            let improving = if self.at_upper[j] {
                d[j].is_negative()
            } else {
                d[j].is_positive()
            };
            if !improving {
                continue;
            }
            if bland {
                return Some(j);
            }
            let score = d[j].abs();
            if best.as_ref().map_or(true, |(_, s)| &score > s) {
                best = Some((j, score));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Returns the step length and the leaving row with the bound the
    /// leaving variable lands on (`None` for an entering bound flip).
    fn ratio_test(&self, j: usize, increase: bool) -> Result<(Q, Option<(usize, bool)>), LpError> {
        let mut best: Option<(Q, usize, usize, bool)> = None;
        for i in 0..self.rows {
            let aij = &self.a[i][j];
            if aij.is_zero() {
                continue;
            }
            // Basic value moves by -rate * t.
            let rate = if increase { aij.clone() } else { -aij };
            let (limit, to_upper) = if rate.is_positive() {
                (&self.beta[i] / &rate, false)
            } else {
                match &self.upper[self.basis[i]] {
                    Some(u) => (&(u - &self.beta[i]) / &-&rate, true),
                    None => continue,
                }
            };
            let var = self.basis[i];
            let replace = match &best {
                None => true,
                Some((t, _, v, _)) => limit < *t || (limit == *t && var < *v),
            };
            if replace {
                best = Some((limit, i, var, to_upper));
            }
        }
        let flip = self.upper[j].clone();
        match (best, flip) {
            (None, None) => Err(LpError::Unbounded),
            (None, Some(u)) => Ok((u, None)),
            (Some((t, ..)), Some(u)) if u < t => Ok((u, None)),
            (Some((t, r, _, up)), _) => Ok((t, Some((r, up)))),
        }
    }

    fn pivot(&mut self, r: usize, j: usize, entering_value: Q) {
        let inv = self.a[r][j].recip();
        let nonzero: Vec<usize> = (0..self.cols).filter(|&k| !self.a[r][k].is_zero()).collect();
        for &k in &nonzero {
            self.a[r][k] = &self.a[r][k] * &inv;
        }
        let pivot_row = std::mem::take(&mut self.a[r]);
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r || row[j].is_zero() {
                continue;
            }
            let f = row[j].clone();
            for &k in &nonzero {
                row[k].sub_mul(&f, &pivot_row[k]);
            }
        }
        self.a[r] = pivot_row;
        let leaving = self.basis[r];
        self.basic_row[leaving] = None;
        self.basis[r] = j;
        self.basic_row[j] = Some(r);
        self.at_upper[j] = false;
        self.beta[r] = entering_value;
    }

    fn values(&self, lp: &LinearProgram) -> Vec<Rational> {
        lp.variables()
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let shifted = match self.basic_row[j] {
                    Some(i) => self.beta[i].to_rational(),
                    None => self.nonbasic_value(j).to_rational(),
                };
                shifted + &v.lower
            })
            .collect()
    }

    /// Nonbasic structurals and slacks; `None` if an artificial is still
    /// basic, in which case the caller falls back to elimination.
    fn defining_set(&self) -> Option<Vec<Tight>> {
        if self.basis.iter().any(|&b| self.is_artificial(b)) {
            return None;
        }
        let mut out = Vec::with_capacity(self.structural);
        for j in 0..self.structural + self.rows {
            if self.basic_row[j].is_some() {
                continue;
            }
            out.push(if j >= self.structural {
                Tight::Row(j - self.structural)
            } else if self.at_upper[j] {
                Tight::Upper(j)
            } else {
                Tight::Lower(j)
            });
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{int, ratio};

    fn single_var() -> LinearProgram {
        let mut lp = LinearProgram::new();
        let y = lp.add_variable("y", int(0), None, int(1)).unwrap();
        lp.add_constraint("cap", vec![(y, int(1))], int(1)).unwrap();
        lp
    }

    #[test]
    fn maximize_single_variable() {
        let sol = solve_extreme(&single_var()).unwrap();
        assert_eq!(sol.values, vec![int(1)]);
        assert_eq!(sol.objective, int(1));
        assert_eq!(sol.basis, vec![Tight::Row(0)]);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y : x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", int(0), None, int(3)).unwrap();
        let y = lp.add_variable("y", int(0), None, int(5)).unwrap();
        lp.add_constraint("a", vec![(x, int(1))], int(4)).unwrap();
        lp.add_constraint("b", vec![(y, int(2))], int(12)).unwrap();
        lp.add_constraint("c", vec![(x, int(3)), (y, int(2))], int(18)).unwrap();
        for pivot in [PivotRule::Bland, PivotRule::DantzigBland] {
            let sol = solve_extreme_with(&lp, &SimplexConfig { pivot }).unwrap();
            assert_eq!(sol.values, vec![int(2), int(6)]);
            assert_eq!(sol.objective, int(36));
            assert!(is_corner(&lp, &sol.values));
            assert_eq!(tight_rank(&lp, &sol.basis), 2);
        }
    }

    #[test]
    fn upper_bounds_and_shifted_lower_bounds() {
        // max x + y : 1 <= x <= 3, 2 <= y, x + y <= 4.5
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", int(1), Some(int(3)), int(1)).unwrap();
        let y = lp.add_variable("y", int(2), None, int(2)).unwrap();
        lp.add_constraint("s", vec![(x, int(1)), (y, int(1))], ratio(9, 2)).unwrap();
        let sol = solve_extreme(&lp).unwrap();
        assert_eq!(sol.values, vec![int(1), ratio(7, 2)]);
        assert!(is_corner(&lp, &sol.values));
    }

    #[test]
    fn phase_one_start() {
        // max -x : x >= 2 written as -x <= -2.
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", int(0), Some(int(10)), int(-1)).unwrap();
        lp.add_constraint("ge", vec![(x, int(-1))], int(-2)).unwrap();
        let sol = solve_extreme(&lp).unwrap();
        assert_eq!(sol.values, vec![int(2)]);
        assert_eq!(sol.basis, vec![Tight::Row(0)]);
    }

    #[test]
    fn redundant_equal_rows_after_phase_one() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", int(0), None, int(-1)).unwrap();
        let y = lp.add_variable("y", int(0), None, int(-1)).unwrap();
        for label in ["r1", "r2"] {
            lp.add_constraint(label, vec![(x, int(-1)), (y, int(-1))], int(-3)).unwrap();
        }
        let sol = solve_extreme(&lp).unwrap();
        assert_eq!(sol.objective, int(-3));
        assert!(is_corner(&lp, &sol.values));
        assert_eq!(tight_rank(&lp, &sol.basis), 2);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", int(0), Some(int(1)), int(1)).unwrap();
        lp.add_constraint("ge", vec![(x, int(-1))], int(-2)).unwrap();
        assert_eq!(solve_extreme(&lp), Err(LpError::Infeasible));

        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", int(0), None, int(1)).unwrap();
        let y = lp.add_variable("y", int(0), None, int(0)).unwrap();
        lp.add_constraint("d", vec![(x, int(1)), (y, int(-1))], int(1)).unwrap();
        assert_eq!(solve_extreme(&lp), Err(LpError::Unbounded));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let mut obj_lp = LinearProgram::new();
        let costs = [ratio(3, 4), int(-150), ratio(1, 50), int(-6)];
        for (i, c) in costs.iter().enumerate() {
            obj_lp.add_variable(format!("x{i}"), int(0), None, c.clone()).unwrap();
        }
        let rows = [
            (vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)], int(0)),
            (vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)], int(0)),
            (vec![int(0), int(0), int(1), int(0)], int(1)),
        ];
        for (k, (coeffs, rhs)) in rows.into_iter().enumerate() {
            let terms = coeffs.into_iter().enumerate().collect();
            obj_lp.add_constraint(format!("r{k}"), terms, rhs).unwrap();
        }
        for pivot in [PivotRule::Bland, PivotRule::DantzigBland] {
            let sol = solve_extreme_with(&obj_lp, &SimplexConfig { pivot }).unwrap();
            assert_eq!(sol.objective, ratio(1, 20));
            assert!(is_corner(&obj_lp, &sol.values));
        }
    }

    #[test]
    fn duplicate_labels_rejected() {
        let mut lp = LinearProgram::new();
        lp.add_variable("x", int(0), None, int(1)).unwrap();
        assert_eq!(
            lp.add_variable("x", int(0), None, int(1)),
            Err(LpError::DuplicateLabel("x".into()))
        );
        assert_eq!(
            lp.add_variable("z", int(2), Some(int(1)), int(1)),
            Err(LpError::EmptyRange("z".into()))
        );
    }

    #[test]
    fn lp_text_dump() {
        let text = single_var().to_lp_text();
        assert_eq!(
            text,
            "Maximize\n obj: + 1 y\nSubject To\n cap: + 1 y <= 1\nBounds\n y >= 0\nEnd\n"
        );
    }
}
