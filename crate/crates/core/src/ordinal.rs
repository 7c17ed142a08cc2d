//! Large-margin ordinal regression with an L1 penalty, solved as an LP.
//!
//! The model embeds samples with `f(x) = wᵀx` and separates consecutive
//! classes with thresholds `b_1 ≤ … ≤ b_{l-1}`. Every sample of class `j`
//! must score at most `b_j − 1` and every sample of class `j+1` at least
//! `b_j + 1`, up to a per-row hinge slack. The L1 norm is linearized as
//! `w = w⁺ − w⁻` with `w⁺, w⁻ ≥ 0`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Standardization};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpSolver, LpStatus, Relation, RevisedSimplex, Sense};

/// One margin row: sample `sample` kept below (`above == false`) or above
/// threshold `threshold` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarginRow {
    pub sample: usize,
    pub threshold: usize,
    pub above: bool,
}

/// Variable and row layout shared by the baseline and relevance LPs.
///
/// Columns: `w⁺` (n), `w⁻` (n), thresholds (l − 1), then one hinge slack per
/// margin row. Rows: margin rows in `rows` order, then the `l − 2` threshold
/// ordering rows.
#[derive(Debug, Clone)]
pub struct MarginLayout {
    pub n_features: usize,
    pub n_classes: usize,
    pub rows: Vec<MarginRow>,
}

impl MarginLayout {
    pub fn new(dataset: &Dataset) -> Result<Self> {
        let l = dataset.n_classes();
        if l < 2 {
            return Err(Error::InvalidDataset("at least two classes are required".into()));
        }
        let members = dataset.class_members();
        let mut rows = Vec::new();
        for j in 0..l - 1 {
            rows.extend(members[j].iter().map(|&i| MarginRow {
                sample: i,
                threshold: j,
                above: false,
            }));
            rows.extend(members[j + 1].iter().map(|&i| MarginRow {
                sample: i,
                threshold: j,
                above: true,
            }));
        }
        Ok(Self {
            n_features: dataset.n_features(),
            n_classes: l,
            rows,
        })
    }

    pub fn w_plus(&self, k: usize) -> usize {
        k
    }

    pub fn w_minus(&self, k: usize) -> usize {
        self.n_features + k
    }

    pub fn threshold(&self, j: usize) -> usize {
        2 * self.n_features + j
    }

    pub fn slack(&self, r: usize) -> usize {
        2 * self.n_features + self.n_classes - 1 + r
    }

    pub fn n_vars(&self) -> usize {
        2 * self.n_features + self.n_classes - 1 + self.rows.len()
    }

    pub fn n_ordering_rows(&self) -> usize {
        self.n_classes.saturating_sub(2)
    }

    /// Margin and ordering rows with bounds set; objective left at zero.
    pub fn constraint_lp(&self, dataset: &Dataset) -> Result<LinearProgram> {
        let n = self.n_features;
        let mut lp = LinearProgram::new(self.n_vars(), Sense::Minimize);
        for k in 0..n {
            lp.set_bounds(self.w_plus(k), 0.0, f64::INFINITY)?;
            lp.set_bounds(self.w_minus(k), 0.0, f64::INFINITY)?;
        }
        for r in 0..self.rows.len() {
            lp.set_bounds(self.slack(r), 0.0, f64::INFINITY)?;
        }
        let mut entries = Vec::with_capacity(2 * n + 2);
        for (r, row) in self.rows.iter().enumerate() {
            entries.clear();
            for (k, &v) in dataset.row(row.sample).iter().enumerate() {
                if v != 0.0 {
                    entries.push((self.w_plus(k), v));
                    entries.push((self.w_minus(k), -v));
                }
            }
            entries.push((self.threshold(row.threshold), -1.0));
            if row.above {
                // wᵀx ≥ b_j + 1 − ξ
                entries.push((self.slack(r), 1.0));
                lp.add_sparse_constraint(&entries, Relation::Ge, 1.0)?;
            } else {
                // wᵀx ≤ b_j − 1 + χ
                entries.push((self.slack(r), -1.0));
                lp.add_sparse_constraint(&entries, Relation::Le, -1.0)?;
            }
        }
        for j in 0..self.n_ordering_rows() {
            lp.add_sparse_constraint(
                &[(self.threshold(j), 1.0), (self.threshold(j + 1), -1.0)],
                Relation::Le,
                0.0,
            )?;
        }
        Ok(lp)
    }

    /// `(w, b, Σ slacks)` read from an LP solution vector.
    pub fn extract(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let n = self.n_features;
        let w = (0..n)
            .map(|k| x[self.w_plus(k)] - x[self.w_minus(k)])
            .collect();
        let b = (0..self.n_classes - 1).map(|j| x[self.threshold(j)]).collect();
        let slack = (0..self.rows.len()).map(|r| x[self.slack(r)].max(0.0)).sum();
        (w, b, slack)
    }
}

/// The baseline LP: minimize `0.5·‖w‖₁ + C·Σ slacks` over the margin rows.
pub fn build_baseline_lp(dataset: &Dataset, c: f64) -> Result<(LinearProgram, MarginLayout)> {
    check_c(c)?;
    let layout = MarginLayout::new(dataset)?;
    let mut lp = layout.constraint_lp(dataset)?;
    let mut objective = vec![0.0; layout.n_vars()];
    for k in 0..layout.n_features {
        objective[layout.w_plus(k)] = 0.5;
        objective[layout.w_minus(k)] = 0.5;
    }
    for r in 0..layout.rows.len() {
        objective[layout.slack(r)] = c;
    }
    lp.set_objective(Sense::Minimize, objective)?;
    Ok((lp, layout))
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("C must be positive and finite, got {c}")))
    }
}

/// A fitted ordinal regression model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinalModel {
    pub weights: Vec<f64>,
    /// Nondecreasing, length `l − 1`.
    pub thresholds: Vec<f64>,
    pub c: f64,
    /// `‖w‖₁ + C·Σ slacks` at the optimum. Note the LP itself weighs the
    /// norm by 0.5; this value does not.
    pub mu_x: f64,
    pub slack_total: f64,
    pub standardization: Standardization,
}

impl OrdinalModel {
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn n_classes(&self) -> usize {
        self.thresholds.len() + 1
    }

    pub fn l1_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// `wᵀz` for the standardized input `z`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                got: x.len(),
            });
        }
        let z = self.standardization.apply_row(x);
        Ok(self.weights.iter().zip(&z).map(|(w, v)| w * v).sum())
    }

    /// Smallest class `i` with `wᵀx ≤ b_i`, taking `b_l = +∞`.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let s = self.score(x)?;
        Ok(self
            .thresholds
            .iter()
            .position(|&b| s <= b)
            .map_or(self.n_classes(), |i| i + 1))
    }

    pub fn predict_dataset(&self, dataset: &Dataset) -> Result<Vec<usize>> {
        dataset.rows().map(|r| self.predict(r)).collect()
    }
}

pub fn predict(model: &OrdinalModel, x: &[f64]) -> Result<usize> {
    model.predict(x)
}

/// Fits on the data as given (no standardization).
pub fn fit_baseline(dataset: &Dataset, c: f64) -> Result<OrdinalModel> {
    fit_with_solver(dataset, c, false, &RevisedSimplex::default())
}

/// Fits, optionally z-scoring the features first; the transform is stored
/// in the model so prediction and relevance analysis reuse it.
pub fn fit_model(dataset: &Dataset, c: f64, standardize: bool) -> Result<OrdinalModel> {
    fit_with_solver(dataset, c, standardize, &RevisedSimplex::default())
}

pub fn fit_with_solver(
    dataset: &Dataset,
    c: f64,
    standardize: bool,
    solver: &dyn LpSolver,
) -> Result<OrdinalModel> {
    let standardization = if standardize {
        Standardization::fit(dataset)
    } else {
        Standardization::identity(dataset.n_features())
    };
    let data = standardization.apply(dataset);
    let (lp, layout) = build_baseline_lp(&data, c)?;
    let out = solver.solve(&lp)?;
    if out.status != LpStatus::Optimal {
        return Err(Error::UnexpectedStatus {
            context: "baseline fit",
            status: out.status,
        });
    }
    let x = out.solution.expect("optimal outcome carries a solution");
    let (weights, mut thresholds, slack_total) = layout.extract(&x);
    // Ordering rows hold to solver tolerance; make it exact.
    for j in 1..thresholds.len() {
        if thresholds[j] < thresholds[j - 1] {
            thresholds[j] = thresholds[j - 1];
        }
    }
    let l1: f64 = weights.iter().map(|w: &f64| w.abs()).sum();
    Ok(OrdinalModel {
        mu_x: l1 + c * slack_total,
        weights,
        thresholds,
        c,
        slack_total,
        standardization,
    })
}

/// Macro-averaged mean absolute error: the per-class mean label distance,
/// averaged over the `l` classes.
pub fn mmae(predicted: &[usize], actual: &[usize], n_classes: usize) -> Result<f64> {
    let per_class = per_class_error(predicted, actual, n_classes)?;
    if let Some(j) = per_class.iter().position(Option::is_none) {
        return Err(Error::EmptyClass { class: j + 1 });
    }
    Ok(per_class.iter().flatten().sum::<f64>() / n_classes as f64)
}

/// MMAE restricted to the classes that occur in `actual`; used on validation
/// and test splits where a small class may be missing.
pub fn mmae_present(predicted: &[usize], actual: &[usize], n_classes: usize) -> Result<f64> {
    let per_class = per_class_error(predicted, actual, n_classes)?;
    let present: Vec<f64> = per_class.into_iter().flatten().collect();
    if present.is_empty() {
        return Err(Error::InvalidDataset("no samples to score".into()));
    }
    Ok(present.iter().sum::<f64>() / present.len() as f64)
}

fn per_class_error(
    predicted: &[usize],
    actual: &[usize],
    n_classes: usize,
) -> Result<Vec<Option<f64>>> {
    if predicted.len() != actual.len() {
        return Err(Error::Dimension {
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    let mut sum = vec![0.0; n_classes];
    let mut count = vec![0usize; n_classes];
    for (&p, &a) in predicted.iter().zip(actual) {
        if a == 0 || a > n_classes {
            return Err(Error::InvalidDataset(format!("label {a} outside 1..={n_classes}")));
        }
        sum[a - 1] += (a as f64 - p as f64).abs();
        count[a - 1] += 1;
    }
    Ok(sum
        .iter()
        .zip(&count)
        .map(|(s, &c)| (c > 0).then(|| s / c as f64))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub c_grid: Vec<f64>,
    pub k_folds: usize,
    pub seed: u64,
    pub standardize: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            c_grid: default_c_grid(),
            k_folds: 5,
            seed: 0,
            standardize: true,
        }
    }
}

/// `2^k` for `k = −7, −5, …, 7`.
pub fn default_c_grid() -> Vec<f64> {
    (-7..=7).step_by(2).map(|k| 2f64.powi(k)).collect()
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_grid.is_empty() {
            return Err(Error::InvalidConfig("C grid is empty".into()));
        }
        for &c in &self.c_grid {
            check_c(c)?;
        }
        if self.k_folds < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 folds, got {}",
                self.k_folds
            )));
        }
        Ok(())
    }
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
/// Returns the fold index of every sample.
pub fn stratified_folds(dataset: &Dataset, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; dataset.n_samples()];
    // Continue the deal across classes so small classes do not all land in
    // fold 0.
    let mut next = 0;
    for mut members in dataset.class_members() {
        members.shuffle(&mut rng);
        for i in members {
            fold[i] = next % k;
            next += 1;
        }
    }
    fold
}

/// Picks the grid value with the lowest mean validation MMAE over stratified
/// folds; ties go to the smaller C.
pub fn select_c(dataset: &Dataset, config: &FitConfig) -> Result<f64> {
    config.validate()?;
    let mut grid = config.c_grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    let k = config.k_folds;
    let folds = stratified_folds(dataset, k, config.seed);
    let mut splits = Vec::with_capacity(k);
    for f in 0..k {
        let train: Vec<usize> = (0..dataset.n_samples()).filter(|&i| folds[i] != f).collect();
        let valid: Vec<usize> = (0..dataset.n_samples()).filter(|&i| folds[i] == f).collect();
        let train = match dataset.select(&train) {
            Ok(t) => t,
            Err(Error::EmptyClass { class }) => {
                return Err(Error::FoldMissingClass { fold: f, class })
            }
            Err(e) => return Err(e),
        };
        splits.push((train, valid));
    }
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..k).map(move |f| (g, f)))
        .collect();
    let scores: Vec<f64> = jobs
        .par_iter()
        .map(|&(g, f)| {
            let (train, valid) = &splits[f];
            let model = fit_model(train, grid[g], config.standardize)?;
            let predicted: Vec<usize> = valid
                .iter()
                .map(|&i| model.predict(dataset.row(i)))
                .collect::<Result<_>>()?;
            let actual: Vec<usize> = valid.iter().map(|&i| dataset.labels()[i]).collect();
            if actual.is_empty() {
                return Ok(0.0);
            }
            mmae_present(&predicted, &actual, dataset.n_classes())
        })
        .collect::<Result<_>>()?;
    let mut best = (f64::INFINITY, grid[0]);
    for (g, &c) in grid.iter().enumerate() {
        let mean = scores[g * k..(g + 1) * k].iter().sum::<f64>() / k as f64;
        if mean < best.0 - 1e-12 {
            best = (mean, c);
        }
    }
    Ok(best.1)
}

/// Selects C by cross-validation, then fits on the full dataset.
pub fn fit_cv(dataset: &Dataset, config: &FitConfig) -> Result<OrdinalModel> {
    let c = select_c(dataset, config)?;
    fit_model(dataset, c, config.standardize)
}
