//! Permutation probes and the final three-way classification.
//!
//! A probe is a real feature column with its entries shuffled: it keeps the
//! marginal distribution but carries no information about the labels. The
//! maximal relevance of many probes calibrates how large an upper bound a
//! useless feature can reach; features above that threshold are relevant.
//! A feature is strongly relevant when replacing it by its own probe makes
//! the cost budget unreachable.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::child_rng;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::lp::{LpSolver, LpStatus, RevisedSimplex, SolverTolerances};
use crate::ordinal::{fit_cv, FitConfig, OrdinalModel};
use crate::relevance::{
    build_feasible_set_lp, relevance_intervals_with, snap, RelevanceConfig, RelevanceInterval,
    DEFAULT_DELTA,
};

const PROBE_STREAM: u64 = 1;
const STRONG_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Number of probes.
    pub d: usize,
    /// Accepted false-positive rate.
    pub r_fp: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            d: 100,
            r_fp: 0.01,
            seed: 0,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidConfig("need at least one probe".into()));
        }
        if !(self.r_fp > 0.0 && self.r_fp < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "false-positive rate must lie in (0, 1), got {}",
                self.r_fp
            )));
        }
        Ok(())
    }

    /// Position of the threshold in the descending list of probe uppers.
    pub fn threshold_index(&self) -> usize {
        threshold_index(self.d, self.r_fp)
    }
}

fn threshold_index(d: usize, r_fp: f64) -> usize {
    (r_fp * d as f64).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelevanceClass {
    StronglyRelevant,
    WeaklyRelevant,
    Irrelevant,
}

impl RelevanceClass {
    pub fn is_relevant(self) -> bool {
        self != RelevanceClass::Irrelevant
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RelevanceClass::StronglyRelevant => "strong",
            RelevanceClass::WeaklyRelevant => "weak",
            RelevanceClass::Irrelevant => "irrelevant",
        }
    }
}

impl std::fmt::Display for RelevanceClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Copy of `dataset` with column `feature` shuffled by a uniform random
/// permutation.
pub fn permute_feature<R: Rng + ?Sized>(dataset: &Dataset, feature: usize, rng: &mut R) -> Dataset {
    let mut column = dataset.column(feature);
    column.shuffle(rng);
    let mut out = dataset.clone();
    out.set_column(feature, &column);
    out
}

fn check_fitted(dataset: &Dataset, baseline: &OrdinalModel) -> Result<()> {
    if dataset.n_features() != baseline.n_features() {
        return Err(Error::Dimension {
            expected: baseline.n_features(),
            got: dataset.n_features(),
        });
    }
    Ok(())
}

/// Maximal relevance of `d` probes. Each probe shuffles one uniformly chosen
/// feature; the budget stays the one of the original fit. A probe whose
/// feasible set is empty contributes 0.
pub fn probe_upper_bounds(
    dataset: &Dataset,
    baseline: &OrdinalModel,
    delta: f64,
    config: &ProbeConfig,
) -> Result<Vec<f64>> {
    probe_upper_bounds_with(dataset, baseline, delta, config, &RevisedSimplex::default())
}

pub fn probe_upper_bounds_with(
    dataset: &Dataset,
    baseline: &OrdinalModel,
    delta: f64,
    config: &ProbeConfig,
    solver: &dyn LpSolver,
) -> Result<Vec<f64>> {
    config.validate()?;
    check_fitted(dataset, baseline)?;
    let data = baseline.standardization.apply(dataset);
    let rel = RelevanceConfig::from_model(baseline, delta);
    (0..config.d)
        .into_par_iter()
        .map(|r| {
            let mut rng = child_rng(config.seed, PROBE_STREAM, r as u64);
            let feature = rng.random_range(0..data.n_features());
            let permuted = permute_feature(&data, feature, &mut rng);
            let set = build_feasible_set_lp(&permuted, &rel)?;
            Ok(set.solve_max(feature, solver)?.unwrap_or(0.0))
        })
        .collect()
}

/// Element `⌊r_fp · d⌋` of the probe uppers sorted in descending order.
pub fn classification_threshold(probe_uppers: &[f64], r_fp: f64) -> Result<f64> {
    if probe_uppers.is_empty() {
        return Err(Error::InvalidConfig("no probe upper bounds".into()));
    }
    if !(r_fp > 0.0 && r_fp < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "false-positive rate must lie in (0, 1), got {r_fp}"
        )));
    }
    let mut sorted = probe_uppers.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let idx = threshold_index(sorted.len(), r_fp).min(sorted.len() - 1);
    Ok(sorted[idx])
}

/// Outcome of replacing a feature by its probe in the minimal-relevance LP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongTest {
    pub strong: bool,
    /// Amount by which the budget row cannot be met (0 when feasible).
    pub residual: f64,
}

/// Residuals up to this multiple of the feasibility tolerance count as
/// solver noise, not as a strong-relevance signal.
const STRONG_RESIDUAL_FACTOR: f64 = 10.0;

pub fn is_strongly_relevant<R: Rng + ?Sized>(
    dataset: &Dataset,
    baseline: &OrdinalModel,
    delta: f64,
    feature: usize,
    rng: &mut R,
) -> Result<bool> {
    check_fitted(dataset, baseline)?;
    let data = baseline.standardization.apply(dataset);
    let permuted = permute_feature(&data, feature, rng);
    let rel = RelevanceConfig::from_model(baseline, delta);
    Ok(strong_test_on(&permuted, &rel, feature, &RevisedSimplex::default())?.strong)
}

/// Strong-relevance test on a dataset whose column `feature` has already
/// been replaced by a probe.
pub fn strong_test_on(
    permuted: &Dataset,
    config: &RelevanceConfig,
    feature: usize,
    solver: &dyn LpSolver,
) -> Result<StrongTest> {
    let set = build_feasible_set_lp(permuted, config)?;
    let out = set.solve_min(feature, solver)?;
    let noise = STRONG_RESIDUAL_FACTOR * SolverTolerances::default().feasibility;
    Ok(match out.status {
        LpStatus::Infeasible => StrongTest {
            strong: out.infeasibility > noise,
            residual: out.infeasibility,
        },
        LpStatus::Optimal => StrongTest {
            strong: false,
            residual: 0.0,
        },
        LpStatus::Unbounded => {
            return Err(Error::UnexpectedStatus {
                context: "strong relevance test",
                status: LpStatus::Unbounded,
            })
        }
    })
}

/// Strong flag first; otherwise weak iff the upper bound strictly exceeds
/// the threshold.
pub fn classify_features(
    intervals: &[RelevanceInterval],
    strong_flags: &[bool],
    threshold: f64,
) -> Result<Vec<RelevanceClass>> {
    if intervals.len() != strong_flags.len() {
        return Err(Error::Dimension {
            expected: intervals.len(),
            got: strong_flags.len(),
        });
    }
    Ok(intervals
        .iter()
        .zip(strong_flags)
        .map(|(iv, &strong)| {
            if strong {
                RelevanceClass::StronglyRelevant
            } else if iv.upper > threshold {
                RelevanceClass::WeaklyRelevant
            } else {
                RelevanceClass::Irrelevant
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub fit: FitConfig,
    pub delta: f64,
    pub probes: ProbeConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            fit: FitConfig::default(),
            delta: DEFAULT_DELTA,
            probes: ProbeConfig::default(),
        }
    }
}

impl AnalysisConfig {
    /// Same settings with every seed replaced by `seed`.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.fit.seed = seed;
        c.probes.seed = seed;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRelevance {
    pub feature: usize,
    pub lower: f64,
    pub upper: f64,
    pub class: RelevanceClass,
    pub strong_test: StrongTest,
    /// Diagnostic cross-check: `lower` is numerically positive.
    pub lower_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub d: usize,
    pub r_fp: f64,
    pub threshold_index: usize,
    pub uppers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceReport {
    pub features: Vec<FeatureRelevance>,
    pub threshold: f64,
    pub delta: f64,
    pub c: f64,
    pub mu_x: f64,
    pub probes: ProbeSummary,
    pub model: OrdinalModel,
}

impl RelevanceReport {
    pub fn classes(&self) -> Vec<RelevanceClass> {
        self.features.iter().map(|f| f.class).collect()
    }

    pub fn intervals(&self) -> Vec<RelevanceInterval> {
        self.features
            .iter()
            .map(|f| RelevanceInterval {
                feature: f.feature,
                lower: f.lower,
                upper: f.upper,
            })
            .collect()
    }

    pub fn count(&self, class: RelevanceClass) -> usize {
        self.features.iter().filter(|f| f.class == class).count()
    }

    /// Indices of features not classified irrelevant.
    pub fn relevant_set(&self) -> std::collections::BTreeSet<usize> {
        self.features
            .iter()
            .filter(|f| f.class.is_relevant())
            .map(|f| f.feature)
            .collect()
    }
}

/// Full pipeline: cross-validated fit, intervals, probes, strong tests and
/// classification.
pub fn analyze(dataset: &Dataset, config: &AnalysisConfig) -> Result<RelevanceReport> {
    let model = fit_cv(dataset, &config.fit)?;
    analyze_with_model(dataset, &model, config.delta, &config.probes)
}

pub fn analyze_with_model(
    dataset: &Dataset,
    model: &OrdinalModel,
    delta: f64,
    probes: &ProbeConfig,
) -> Result<RelevanceReport> {
    probes.validate()?;
    check_fitted(dataset, model)?;
    let solver = RevisedSimplex::default();
    let intervals = relevance_intervals_with(dataset, model, delta, &solver)?;
    let uppers = probe_upper_bounds_with(dataset, model, delta, probes, &solver)?;
    let threshold = classification_threshold(&uppers, probes.r_fp)?;

    let data = model.standardization.apply(dataset);
    let rel = RelevanceConfig::from_model(model, delta);
    let tests: Vec<StrongTest> = (0..data.n_features())
        .into_par_iter()
        .map(|i| {
            let mut rng = child_rng(probes.seed, STRONG_STREAM, i as u64);
            let permuted = permute_feature(&data, i, &mut rng);
            strong_test_on(&permuted, &rel, i, &solver)
        })
        .collect::<Result<_>>()?;
    let flags: Vec<bool> = tests.iter().map(|t| t.strong).collect();
    let classes = classify_features(&intervals, &flags, threshold)?;
    let features = intervals
        .iter()
        .zip(&tests)
        .zip(&classes)
        .map(|((iv, t), &class)| FeatureRelevance {
            feature: iv.feature,
            lower: iv.lower,
            upper: iv.upper,
            class,
            strong_test: *t,
            lower_positive: snap(iv.lower) > 0.0,
        })
        .collect();
    Ok(RelevanceReport {
        features,
        threshold,
        delta,
        c: model.c,
        mu_x: model.mu_x,
        probes: ProbeSummary {
            d: probes.d,
            r_fp: probes.r_fp,
            threshold_index: probes.threshold_index(),
            uppers,
        },
        model: model.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn iv(upper: f64) -> RelevanceInterval {
        RelevanceInterval {
            feature: 0,
            lower: 0.0,
            upper,
        }
    }

    #[test]
    fn threshold_index_rule() {
        let uppers: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(classification_threshold(&uppers, 0.01).unwrap(), 98.0);
        let uppers: Vec<f64> = (0..50).map(f64::from).collect();
        assert_eq!(classification_threshold(&uppers, 0.01).unwrap(), 49.0);
        assert_eq!(classification_threshold(&[0.3; 7], 0.01).unwrap(), 0.3);
        assert!(classification_threshold(&[], 0.01).is_err());
    }

    #[test]
    fn threshold_never_grows_with_rate() {
        let uppers: Vec<f64> = (0..100).map(|i| ((i * 37) % 100) as f64 * 0.01).collect();
        let mut last = f64::INFINITY;
        for k in 1..100 {
            let t = classification_threshold(&uppers, k as f64 / 100.0).unwrap();
            assert!(t <= last);
            last = t;
        }
    }

    #[test]
    fn classification_precedence_and_boundary() {
        let classes =
            classify_features(&[iv(0.0), iv(0.5), iv(0.5), iv(0.6)], &[true, false, false, false], 0.5)
                .unwrap();
        assert_eq!(
            classes,
            vec![
                RelevanceClass::StronglyRelevant,
                RelevanceClass::Irrelevant,
                RelevanceClass::Irrelevant,
                RelevanceClass::WeaklyRelevant
            ]
        );
        assert!(classify_features(&[iv(0.0)], &[], 0.0).is_err());
    }

    #[test]
    fn permutation_preserves_column_multiset_and_other_columns() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, -(i as f64)]).collect();
        let labels = vec![1, 1, 1, 1, 2, 2, 2, 2];
        let d = Dataset::new(rows, labels, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = permute_feature(&d, 0, &mut rng);
        let mut a = p.column(0);
        a.sort_by(f64::total_cmp);
        assert_eq!(a, d.column(0));
        assert_eq!(p.column(1), d.column(1));
        assert_eq!(p.labels(), d.labels());
        let mut rng2 = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(permute_feature(&d, 0, &mut rng2), p);
    }

    #[test]
    fn constant_column_permutes_to_itself() {
        // Datasets need a sample per class, so m = 1 cannot occur; a column
        // with a single distinct value is the closest analogue.
        let d = Dataset::from_flat(2, vec![1.0, 5.0, 2.0, 5.0, 3.0, 5.0], vec![1, 2, 2], None)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(permute_feature(&d, 1, &mut rng), d);
    }

    #[test]
    fn probe_config_validation() {
        assert!(ProbeConfig { d: 0, ..Default::default() }.validate().is_err());
        assert!(ProbeConfig { r_fp: 1.0, ..Default::default() }.validate().is_err());
        assert_eq!(ProbeConfig::default().threshold_index(), 1);
    }
}
