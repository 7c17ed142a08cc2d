//! Relevance intervals over the set of near-optimal hypotheses.
//!
//! A weight vector is acceptable when some thresholds and slacks satisfy the
//! margin rows and its total cost `‖w‖₁ + C·Σ slacks` stays within
//! `(1 + δ)·μ_X`. For each feature the smallest and largest attainable `|w_I|`
//! over that set bound its relevance.
//!
//! Minimizing `|w_I|` is a single LP: with `w_I = w⁺_I − w⁻_I` the sum
//! `w⁺_I + w⁻_I` is minimized only when one part is zero, so its optimum is
//! `min |w_I|`. Maximizing `|w_I|` is not convex, but `max |w_I|` equals
//! `max(max w_I, max −w_I)`, and each of those is an LP over the same rows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, LpSolver, LpStatus, Relation, RevisedSimplex, Sense};
use crate::ordinal::{MarginLayout, OrdinalModel};

/// LP optima below this are reported as exact zeros.
pub const NUMERICAL_ZERO: f64 = 1e-7;

pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceConfig {
    /// Tolerated relative deviation from the optimal cost.
    pub delta: f64,
    pub c: f64,
    pub mu_x: f64,
}

impl RelevanceConfig {
    pub fn from_model(model: &OrdinalModel, delta: f64) -> Self {
        Self {
            delta,
            c: model.c,
            mu_x: model.mu_x,
        }
    }

    pub fn budget(&self) -> f64 {
        (1.0 + self.delta) * self.mu_x
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig(format!("delta must be ≥ 0, got {}", self.delta)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("C must be positive, got {}", self.c)));
        }
        if !(self.mu_x >= 0.0 && self.mu_x.is_finite()) {
            return Err(Error::InvalidConfig(format!("mu_X must be ≥ 0, got {}", self.mu_x)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceInterval {
    pub feature: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Margin and ordering rows plus the budget row
/// `Σ(w⁺ + w⁻) + C·Σ slacks ≤ (1 + δ)·μ_X` (always the last row).
/// The objective is left at zero.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    pub lp: LinearProgram,
    pub layout: MarginLayout,
}

impl FeasibleSet {
    pub fn budget_row(&self) -> usize {
        self.lp.n_constraints() - 1
    }

    fn with_objective(&self, objective: Vec<f64>, sense: Sense) -> LinearProgram {
        let mut lp = self.lp.clone();
        lp.objective = objective;
        lp.sense = sense;
        lp
    }

    /// LP minimizing `w⁺_I + w⁻_I`.
    pub fn min_lp(&self, feature: usize) -> LinearProgram {
        let mut obj = vec![0.0; self.lp.n_vars()];
        obj[self.layout.w_plus(feature)] = 1.0;
        obj[self.layout.w_minus(feature)] = 1.0;
        self.with_objective(obj, Sense::Minimize)
    }

    /// LP maximizing `sign · w_I`.
    pub fn max_lp(&self, feature: usize, sign: f64) -> LinearProgram {
        let mut obj = vec![0.0; self.lp.n_vars()];
        obj[self.layout.w_plus(feature)] = sign;
        obj[self.layout.w_minus(feature)] = -sign;
        self.with_objective(obj, Sense::Maximize)
    }

    fn check_feature(&self, feature: usize) -> Result<()> {
        if feature >= self.layout.n_features {
            return Err(Error::InvalidConfig(format!(
                "feature index {feature} out of range for {} features",
                self.layout.n_features
            )));
        }
        Ok(())
    }

    pub fn solve_min(&self, feature: usize, solver: &dyn LpSolver) -> Result<LpOutcome> {
        self.check_feature(feature)?;
        Ok(solver.solve(&self.min_lp(feature))?)
    }

    /// Both sign-restricted maximizations; `None` if the set is empty.
    pub fn solve_max(&self, feature: usize, solver: &dyn LpSolver) -> Result<Option<f64>> {
        self.check_feature(feature)?;
        let mut best: Option<f64> = None;
        for sign in [1.0, -1.0] {
            let out = solver.solve(&self.max_lp(feature, sign))?;
            match out.status {
                LpStatus::Optimal => {
                    let v = out.objective_value.unwrap_or(0.0);
                    best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
                LpStatus::Infeasible => return Ok(None),
                LpStatus::Unbounded => {
                    return Err(Error::UnexpectedStatus {
                        context: "maximal relevance (budget row bounds every weight)",
                        status: LpStatus::Unbounded,
                    })
                }
            }
        }
        Ok(best.map(snap))
    }
}

pub(crate) fn snap(v: f64) -> f64 {
    if v < NUMERICAL_ZERO {
        0.0
    } else {
        v
    }
}

pub fn build_feasible_set_lp(dataset: &Dataset, config: &RelevanceConfig) -> Result<FeasibleSet> {
    config.validate()?;
    let layout = MarginLayout::new(dataset)?;
    let mut lp = layout.constraint_lp(dataset)?;
    let mut budget = vec![0.0; layout.n_vars()];
    for k in 0..layout.n_features {
        budget[layout.w_plus(k)] = 1.0;
        budget[layout.w_minus(k)] = 1.0;
    }
    for r in 0..layout.rows.len() {
        budget[layout.slack(r)] = config.c;
    }
    lp.add_constraint(budget, Relation::Le, config.budget())?;
    Ok(FeasibleSet { lp, layout })
}

/// Smallest attainable `|w_I|` over the acceptable hypotheses.
pub fn min_relevance(dataset: &Dataset, config: &RelevanceConfig, feature: usize) -> Result<f64> {
    let set = build_feasible_set_lp(dataset, config)?;
    min_relevance_in(&set, feature, &RevisedSimplex::default())
}

pub fn min_relevance_in(set: &FeasibleSet, feature: usize, solver: &dyn LpSolver) -> Result<f64> {
    let out = set.solve_min(feature, solver)?;
    match out.status {
        LpStatus::Optimal => Ok(snap(out.objective_value.unwrap_or(0.0))),
        status => Err(Error::UnexpectedStatus {
            context: "minimal relevance (the baseline optimum should be feasible)",
            status,
        }),
    }
}

/// Largest attainable `|w_I|` over the acceptable hypotheses.
pub fn max_relevance(dataset: &Dataset, config: &RelevanceConfig, feature: usize) -> Result<f64> {
    let set = build_feasible_set_lp(dataset, config)?;
    max_relevance_in(&set, feature, &RevisedSimplex::default())
}

pub fn max_relevance_in(set: &FeasibleSet, feature: usize, solver: &dyn LpSolver) -> Result<f64> {
    set.solve_max(feature, solver)?
        .ok_or(Error::UnexpectedStatus {
            context: "maximal relevance (the baseline optimum should be feasible)",
            status: LpStatus::Infeasible,
        })
}

/// `[minrel(I), maxrel(I)]` for every feature, in standardized units when
/// the baseline was fitted with standardization.
pub fn relevance_intervals(
    dataset: &Dataset,
    baseline: &OrdinalModel,
    delta: f64,
) -> Result<Vec<RelevanceInterval>> {
    relevance_intervals_with(dataset, baseline, delta, &RevisedSimplex::default())
}

pub fn relevance_intervals_with(
    dataset: &Dataset,
    baseline: &OrdinalModel,
    delta: f64,
    solver: &dyn LpSolver,
) -> Result<Vec<RelevanceInterval>> {
    if dataset.n_features() != baseline.n_features() {
        return Err(Error::Dimension {
            expected: baseline.n_features(),
            got: dataset.n_features(),
        });
    }
    let data = baseline.standardization.apply(dataset);
    let config = RelevanceConfig::from_model(baseline, delta);
    let set = build_feasible_set_lp(&data, &config)?;
    (0..data.n_features())
        .into_par_iter()
        .map(|i| {
            let lower = min_relevance_in(&set, i, solver)?;
            let upper = max_relevance_in(&set, i, solver)?;
            Ok(RelevanceInterval {
                feature: i,
                lower,
                upper: upper.max(lower),
            })
        })
        .collect()
}

/// Converts standardized-unit intervals back to raw feature units.
pub fn to_raw_units(intervals: &[RelevanceInterval], model: &OrdinalModel) -> Vec<RelevanceInterval> {
    intervals
        .iter()
        .map(|iv| {
            let sd = model.standardization.std[iv.feature];
            RelevanceInterval {
                feature: iv.feature,
                lower: iv.lower / sd,
                upper: iv.upper / sd,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::assert_feasible;
    use crate::ordinal::{build_baseline_lp, fit_baseline};

    fn separable_1d() -> Dataset {
        Dataset::new(vec![vec![-2.0], vec![2.0]], vec![1, 2], None).unwrap()
    }

    fn cfg(delta: f64) -> RelevanceConfig {
        RelevanceConfig {
            delta,
            c: 1.0,
            mu_x: 0.5,
        }
    }

    #[test]
    fn budget_rhs() {
        let set = build_feasible_set_lp(&separable_1d(), &cfg(0.0)).unwrap();
        assert_eq!(set.lp.constraints[set.budget_row()].rhs, 0.5);
        let set = build_feasible_set_lp(&separable_1d(), &cfg(0.5)).unwrap();
        assert!((set.lp.constraints[set.budget_row()].rhs - 0.75).abs() < 1e-15);
        assert_eq!(set.lp.objective, vec![0.0; set.lp.n_vars()]);
    }

    #[test]
    fn baseline_optimum_is_in_the_feasible_set() {
        let d = separable_1d();
        let (lp, _) = build_baseline_lp(&d, 1.0).unwrap();
        let x = crate::lp::solve_lp(&lp, Default::default()).unwrap().solution.unwrap();
        let model = fit_baseline(&d, 1.0).unwrap();
        let set = build_feasible_set_lp(&d, &RelevanceConfig::from_model(&model, 0.0)).unwrap();
        assert!(assert_feasible(&set.lp, &x, 1e-8).unwrap());
    }

    #[test]
    fn single_feature_is_pinned() {
        assert!((min_relevance(&separable_1d(), &cfg(0.0), 0).unwrap() - 0.5).abs() < 1e-9);
        assert!((max_relevance(&separable_1d(), &cfg(0.0), 0).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_feature_is_an_error() {
        assert!(min_relevance(&separable_1d(), &cfg(0.0), 1).is_err());
    }

    #[test]
    fn negative_delta_is_rejected() {
        assert!(build_feasible_set_lp(&separable_1d(), &cfg(-0.1)).is_err());
    }

    #[test]
    fn infeasible_budget_is_reported_as_inconsistency() {
        let c = RelevanceConfig {
            delta: 0.0,
            c: 1.0,
            mu_x: 0.1,
        };
        assert!(matches!(
            min_relevance(&separable_1d(), &c, 0),
            Err(Error::UnexpectedStatus {
                status: LpStatus::Infeasible,
                ..
            })
        ));
    }

    #[test]
    fn raw_unit_conversion_divides_by_std() {
        let d = Dataset::new(vec![vec![-4.0], vec![4.0]], vec![1, 2], None).unwrap();
        let model = crate::ordinal::fit_model(&d, 1.0, true).unwrap();
        let iv = relevance_intervals(&d, &model, 0.0).unwrap();
        let raw = to_raw_units(&iv, &model);
        assert!((raw[0].lower - iv[0].lower / 4.0).abs() < 1e-12);
    }
}
