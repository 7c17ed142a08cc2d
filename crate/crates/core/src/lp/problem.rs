use serde::{Deserialize, Serialize};

use super::LpError;

/// Relation of a constraint row to its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// One dense constraint row: `coeffs · x  (relation)  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program over `n_vars` variables with per-variable bounds.
///
/// Bounds may be infinite (`f64::NEG_INFINITY` / `f64::INFINITY`); new
/// variables start out free.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    n_vars: usize,
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(n_vars: usize, sense: Sense) -> Self {
        Self {
            n_vars,
            objective: vec![0.0; n_vars],
            sense,
            constraints: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n_vars],
            upper: vec![f64::INFINITY; n_vars],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Appends a fresh free variable and returns its index. Existing rows are
    /// extended with a zero coefficient.
    pub fn add_var(&mut self) -> usize {
        self.n_vars += 1;
        self.objective.push(0.0);
        self.lower.push(f64::NEG_INFINITY);
        self.upper.push(f64::INFINITY);
        for c in &mut self.constraints {
            c.coeffs.push(0.0);
        }
        self.n_vars - 1
    }

    pub fn set_objective(&mut self, sense: Sense, objective: Vec<f64>) -> Result<(), LpError> {
        if objective.len() != self.n_vars {
            return Err(LpError::Dimension {
                what: "objective",
                expected: self.n_vars,
                got: objective.len(),
            });
        }
        self.sense = sense;
        self.objective = objective;
        Ok(())
    }

    pub fn add_constraint(
        &mut self,
        coeffs: Vec<f64>,
        relation: Relation,
        rhs: f64,
    ) -> Result<usize, LpError> {
        if coeffs.len() != self.n_vars {
            return Err(LpError::Dimension {
                what: "constraint row",
                expected: self.n_vars,
                got: coeffs.len(),
            });
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        Ok(self.constraints.len() - 1)
    }

    /// Adds a row given only its nonzero entries.
    pub fn add_sparse_constraint(
        &mut self,
        entries: &[(usize, f64)],
        relation: Relation,
        rhs: f64,
    ) -> Result<usize, LpError> {
        let mut coeffs = vec![0.0; self.n_vars];
        for &(j, v) in entries {
            if j >= self.n_vars {
                return Err(LpError::Dimension {
                    what: "constraint entry index",
                    expected: self.n_vars,
                    got: j,
                });
            }
            coeffs[j] += v;
        }
        self.add_constraint(coeffs, relation, rhs)
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        if var >= self.n_vars {
            return Err(LpError::Dimension {
                what: "variable index",
                expected: self.n_vars,
                got: var,
            });
        }
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(())
    }

    /// Checks the structural invariants: consistent lengths, ordered bounds
    /// and finite coefficients.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.n_vars;
        for (what, len) in [
            ("objective", self.objective.len()),
            ("lower bounds", self.lower.len()),
            ("upper bounds", self.upper.len()),
        ] {
            if len != n {
                return Err(LpError::Dimension {
                    what,
                    expected: n,
                    got: len,
                });
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed("non-finite objective coefficient".into()));
        }
        for (j, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
            {
                return Err(LpError::Malformed(format!(
                    "variable {j} has invalid bounds [{lo}, {hi}]"
                )));
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::Dimension {
                    what: "constraint row",
                    expected: n,
                    got: row.coeffs.len(),
                });
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(LpError::Malformed(format!("row {i} has non-finite entries")));
            }
        }
        Ok(())
    }

    /// Objective value of `point` in the problem's own sense.
    pub fn objective_at(&self, point: &[f64]) -> f64 {
        dot(&self.objective, point)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Returns whether `point` satisfies every row and bound of `problem` within
/// `tol`.
pub fn assert_feasible(problem: &LinearProgram, point: &[f64], tol: f64) -> Result<bool, LpError> {
    if point.len() != problem.n_vars() {
        return Err(LpError::Dimension {
            what: "point",
            expected: problem.n_vars(),
            got: point.len(),
        });
    }
    Ok(max_violation(problem, point) <= tol)
}

/// Largest absolute violation of any row or bound at `point`.
pub fn max_violation(problem: &LinearProgram, point: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for (j, &x) in point.iter().enumerate() {
        worst = worst.max(problem.lower[j] - x).max(x - problem.upper[j]);
    }
    for row in &problem.constraints {
        let lhs = dot(&row.coeffs, point);
        let v = match row.relation {
            Relation::Le => lhs - row.rhs,
            Relation::Ge => row.rhs - lhs,
            Relation::Eq => (lhs - row.rhs).abs(),
        };
        worst = worst.max(v);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_var_ge_one() -> LinearProgram {
        let mut lp = LinearProgram::new(1, Sense::Minimize);
        lp.add_constraint(vec![1.0], Relation::Ge, 1.0).unwrap();
        lp
    }

    #[test]
    fn boundary_point_is_feasible() {
        assert!(assert_feasible(&one_var_ge_one(), &[1.0], 1e-8).unwrap());
    }

    #[test]
    fn violated_point_is_infeasible() {
        assert!(!assert_feasible(&one_var_ge_one(), &[0.5], 1e-8).unwrap());
    }

    #[test]
    fn point_length_mismatch_is_an_error() {
        assert!(matches!(
            assert_feasible(&one_var_ge_one(), &[1.0, 2.0], 1e-8),
            Err(LpError::Dimension { .. })
        ));
    }

    #[test]
    fn row_length_mismatch_is_rejected() {
        let mut lp = LinearProgram::new(2, Sense::Minimize);
        assert!(lp.add_constraint(vec![1.0], Relation::Le, 0.0).is_err());
        lp.constraints.push(Constraint {
            coeffs: vec![1.0],
            relation: Relation::Le,
            rhs: 0.0,
        });
        assert!(matches!(lp.validate(), Err(LpError::Dimension { .. })));
    }

    #[test]
    fn crossed_bounds_are_rejected() {
        let mut lp = LinearProgram::new(1, Sense::Minimize);
        lp.set_bounds(0, 2.0, 1.0).unwrap();
        assert!(matches!(lp.validate(), Err(LpError::Malformed(_))));
    }

    #[test]
    fn add_var_extends_rows() {
        let mut lp = one_var_ge_one();
        let t = lp.add_var();
        assert_eq!(t, 1);
        assert_eq!(lp.constraints[0].coeffs, vec![1.0, 0.0]);
        lp.validate().unwrap();
    }
}
