use std::collections::HashSet;
use std::fmt::Write as _;

use num_traits::{Signed, ToPrimitive, Zero};

use super::LpError;
use crate::format::format_rational;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub label: String,
    pub lower: Rational,
    pub upper: Option<Rational>,
}

/// `sum(coeff * x) <= rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub label: String,
    pub terms: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

/// Maximize a linear objective subject to `<=` rows and variable bounds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearProgram {
    variables: Vec<Variable>,
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
    labels: HashSet<String>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    fn claim(&mut self, label: &str) -> Result<(), LpError> {
        if !self.labels.insert(label.to_owned()) {
            return Err(LpError::DuplicateLabel(label.to_owned()));
        }
        Ok(())
    }

    /// Adds a variable with objective coefficient `cost`; returns its index.
    pub fn add_variable(
        &mut self,
        label: impl Into<String>,
        lower: Rational,
        upper: Option<Rational>,
        cost: Rational,
    ) -> Result<usize, LpError> {
        let label = label.into();
        if upper.as_ref().is_some_and(|u| u < &lower) {
            return Err(LpError::EmptyRange(label));
        }
        self.claim(&label)?;
        self.variables.push(Variable { label, lower, upper });
        self.objective.push(cost);
        Ok(self.variables.len() - 1)
    }

    /// Adds `sum(terms) <= rhs`. Repeated indices are merged and zero
    /// coefficients dropped.
    pub fn add_constraint(
        &mut self,
        label: impl Into<String>,
        terms: Vec<(usize, Rational)>,
        rhs: Rational,
    ) -> Result<usize, LpError> {
        let label = label.into();
        if let Some(&(j, _)) = terms.iter().find(|(j, _)| *j >= self.variables.len()) {
            return Err(LpError::UnknownVariable { row: label, index: j });
        }
        self.claim(&label)?;
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(terms.len());
        let mut sorted = terms;
        sorted.sort_by_key(|(j, _)| *j);
        for (j, a) in sorted {
            match merged.last_mut() {
                Some((k, b)) if *k == j => *b += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|(_, a)| !a.is_zero());
        self.constraints.push(Constraint {
            label,
            terms: merged,
            rhs,
        });
        Ok(self.constraints.len() - 1)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn variable_index(&self, label: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.label == label)
    }

    pub fn evaluate(&self, values: &[Rational]) -> Rational {
        self.objective.iter().zip(values).map(|(c, x)| c * x).sum()
    }

    pub fn row_activity(&self, row: usize, values: &[Rational]) -> Rational {
        self.constraints[row]
            .terms
            .iter()
            .map(|(j, a)| a * &values[*j])
            .sum()
    }

    /// Checks every row and bound exactly.
    pub fn is_feasible(&self, values: &[Rational]) -> bool {
        values.len() == self.variables.len()
            && self.variables.iter().zip(values).all(|(v, x)| {
                x >= &v.lower && v.upper.as_ref().map_or(true, |u| x <= u)
            })
            && (0..self.constraints.len())
                .all(|i| self.row_activity(i, values) <= self.constraints[i].rhs)
    }

    /// CPLEX-style LP text. Non-terminating rationals are written as
    /// 17-digit decimals, so the dump is for cross-checking, not exact replay.
    pub fn to_lp_text(&self) -> String {
        let num = |q: &Rational| -> String {
            let s = format_rational(q);
            if s.contains('/') {
                format!("{:.17}", q.to_f64().unwrap_or(f64::NAN))
            } else {
                s
            }
        };
        let linear = |terms: &mut dyn Iterator<Item = (usize, &Rational)>| -> String {
            let mut out = String::new();
            for (j, a) in terms {
                if a.is_zero() {
                    continue;
                }
                let sign = if a.is_negative() { "-" } else { "+" };
                let _ = write!(out, " {sign} {} {}", num(&a.abs()), self.variables[j].label);
            }
            if out.is_empty() {
                " 0".to_owned()
            } else {
                out
            }
        };

        let mut out = String::from("Maximize\n obj:");
        out += &linear(&mut self.objective.iter().enumerate());
        out += "\nSubject To\n";
        for c in &self.constraints {
            let _ = writeln!(
                out,
                " {}:{} <= {}",
                c.label,
                linear(&mut c.terms.iter().map(|(j, a)| (*j, a))),
                num(&c.rhs)
            );
        }
        out += "Bounds\n";
        for v in &self.variables {
            match &v.upper {
                Some(u) => {
                    let _ = writeln!(out, " {} <= {} <= {}", num(&v.lower), v.label, num(u));
                }
                None => {
                    let _ = writeln!(out, " {} >= {}", v.label, num(&v.lower));
                }
            }
        }
        out += "End\n";
        out
    }
}
