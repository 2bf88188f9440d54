//! Linear programs: a small sparse problem representation, a dense simplex,
//! and the capacity / minimum-energy formulations built on them.

mod formulation;
mod lp_format;
mod plan;
mod simplex;
mod two_stage;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use formulation::{
    build_capacity_lp, build_min_energy_lp, Formulation, FlowModel, TupleGrouping,
};
pub use plan::{validate_plan, PlanResiduals, SchedulePlan};
pub use simplex::{solve_lp, Simplex, SimplexOptions};
pub use two_stage::{
    solve_capacity, solve_min_energy, solve_two_stage, CapacityStage, SolveStats, SolveStatus,
    SolverOptions, Strategy, TwoStageOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    LessEq,
    Equal,
    GreaterEq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    /// `f64::INFINITY` when unbounded above.
    pub upper: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Sparse LP: `sense  c'x  s.t.  rows,  lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub sense: Sense,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

impl LpProblem {
    pub fn new(sense: Sense) -> Self {
        LpProblem {
            sense,
            variables: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            objective,
        });
        self.variables.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        for (j, v) in self.variables.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(Error::MalformedLp(format!("variable {j} ({}) has lower > upper", v.name)));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(Error::MalformedLp(format!("variable {j} ({}) has an empty domain", v.name)));
            }
            if !v.objective.is_finite() {
                return Err(Error::MalformedLp(format!("variable {j} objective not finite")));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(Error::MalformedLp(format!("row {i} ({}) rhs not finite", c.name)));
            }
            for &(j, a) in &c.terms {
                if j >= self.variables.len() {
                    return Err(Error::MalformedLp(format!("row {i} references missing variable {j}")));
                }
                if !a.is_finite() {
                    return Err(Error::MalformedLp(format!("row {i} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.variables.iter().zip(x).map(|(v, xi)| v.objective * xi).sum()
    }

    pub fn row_activity(&self, row: usize, x: &[f64]) -> f64 {
        self.constraints[row].terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest absolute violation of any row or bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, c) in self.constraints.iter().enumerate() {
            let lhs = self.row_activity(i, x);
            let v = match c.relation {
                Relation::LessEq => lhs - c.rhs,
                Relation::GreaterEq => c.rhs - lhs,
                Relation::Equal => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (v, &xi) in self.variables.iter().zip(x) {
            worst = worst.max(v.lower - xi).max(xi - v.upper);
        }
        worst
    }

    /// Render in CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        lp_format::write(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    /// Empty unless optimal.
    pub primal: Vec<f64>,
    /// Sensitivity of the objective to each row's right-hand side. Empty unless optimal.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
