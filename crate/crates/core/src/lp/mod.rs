//! Linear programs and the simplex solver every other module builds on.

mod problem;
mod simplex;

pub use problem::{assert_feasible, max_violation, Constraint, LinearProgram, Relation, Sense};
pub use simplex::{PricingRule, RevisedSimplex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("{what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("simplex did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverTolerances {
    /// Constraint and bound satisfaction.
    pub feasibility: f64,
    /// Smallest pivot element accepted in the ratio test.
    pub pivot: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality: f64,
    /// Pivot cap; `None` means `50 · (n_vars + n_constraints)`.
    pub max_iterations: Option<usize>,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self {
            feasibility: 1e-8,
            pivot: 1e-9,
            optimality: 1e-9,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Present iff `status` is `Optimal`.
    pub solution: Option<Vec<f64>>,
    /// Present iff `status` is `Optimal`.
    pub objective_value: Option<f64>,
    /// Row duals in the problem's own sense (sensitivity of the optimum to
    /// each right-hand side); present iff `Optimal`.
    pub duals: Option<Vec<f64>>,
    /// Phase-one residual: sum of artificial values at the end of phase one.
    /// Zero when no artificials were needed.
    pub infeasibility: f64,
    pub iterations: usize,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// A backend able to solve [`LinearProgram`]s.
pub trait LpSolver: Sync {
    fn solve(&self, problem: &LinearProgram) -> Result<LpOutcome, LpError>;
}

/// Solves `problem` with the default revised simplex backend.
pub fn solve_lp(problem: &LinearProgram, tol: SolverTolerances) -> Result<LpOutcome, LpError> {
    RevisedSimplex::new(tol).solve(problem)
}
