//! Feature-set recovery and predictive-quality experiments.

use std::collections::BTreeSet;
use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::datagen::{generate, GenSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::ordinal::{fit_cv, mmae_present};
use crate::probes::{analyze, analyze_with_model, AnalysisConfig, RelevanceClass};
use crate::child_rng;

const SPLIT_STREAM: u64 = 3;
const MAX_SPLIT_RETRIES: u64 = 10;

/// Harmonic mean of precision and recall of `detected` against `truth`.
/// Two empty sets score 1; exactly one empty set scores 0.
pub fn f_measure(detected: &BTreeSet<usize>, truth: &BTreeSet<usize>) -> f64 {
    match (detected.is_empty(), truth.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let hits = detected.intersection(truth).count() as f64;
    if hits == 0.0 {
        return 0.0;
    }
    let p = hits / detected.len() as f64;
    let r = hits / truth.len() as f64;
    2.0 * p * r / (p + r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation; 0 for a single value.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self {
            mean,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub f_measure: Option<f64>,
    /// Held-out MMAE (benchmark runs only).
    pub mmae: Option<f64>,
    pub selected_c: f64,
    pub classes: Vec<RelevanceClass>,
    pub n_strong: usize,
    pub n_weak: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Synthetic,
    Benchmark,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub kind: ExperimentKind,
    pub runs: Vec<RunRecord>,
    pub f_measure: Option<Summary>,
    pub mmae: Option<Summary>,
    pub n_strong: Summary,
    pub n_weak: Summary,
}

impl ExperimentResult {
    fn from_runs(kind: ExperimentKind, runs: Vec<RunRecord>) -> Self {
        let collect = |f: &dyn Fn(&RunRecord) -> Option<f64>| -> Vec<f64> {
            runs.iter().filter_map(f).collect()
        };
        let n_strong = collect(&|r| Some(r.n_strong as f64));
        let n_weak = collect(&|r| Some(r.n_weak as f64));
        Self {
            kind,
            f_measure: Summary::of(&collect(&|r| r.f_measure)),
            mmae: Summary::of(&collect(&|r| r.mmae)),
            n_strong: Summary::of(&n_strong).expect("at least one run"),
            n_weak: Summary::of(&n_weak).expect("at least one run"),
            runs,
        }
    }
}

fn check_runs(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidConfig(format!("need at least one {what}")));
    }
    Ok(())
}

fn count(classes: &[RelevanceClass], class: RelevanceClass) -> usize {
    classes.iter().filter(|&&c| c == class).count()
}

/// Generates `n_runs` datasets with seeds `spec.seed + r` and scores the
/// detected relevant set of each against the generator's ground truth.
pub fn run_synthetic_experiment(
    spec: &GenSpec,
    config: &AnalysisConfig,
    n_runs: usize,
) -> Result<ExperimentResult> {
    check_runs(n_runs, "run")?;
    spec.validate()?;
    let mut runs = Vec::with_capacity(n_runs);
    for r in 0..n_runs as u64 {
        let seed = spec.seed.wrapping_add(r);
        let run = synthetic_run(spec, config, seed).map_err(|e| Error::RunFailed {
            seed,
            source: Box::new(e),
        })?;
        runs.push(run);
    }
    Ok(ExperimentResult::from_runs(ExperimentKind::Synthetic, runs))
}

fn synthetic_run(spec: &GenSpec, config: &AnalysisConfig, seed: u64) -> Result<RunRecord> {
    let (data, truth) = generate(&spec.clone().with_seed(seed))?;
    let report = analyze(&data, &config.with_seed(seed))?;
    let classes = report.classes();
    Ok(RunRecord {
        seed,
        f_measure: Some(f_measure(&report.relevant_set(), &truth.relevant())),
        mmae: None,
        selected_c: report.c,
        n_strong: count(&classes, RelevanceClass::StronglyRelevant),
        n_weak: count(&classes, RelevanceClass::WeaklyRelevant),
        classes,
    })
}

/// Stratified random split: a third of every class (rounded down) goes to
/// the test side. Returns `(train, test)` sample indices, both sorted.
pub fn stratified_split(dataset: &Dataset, seed: u64, index: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = child_rng(seed, SPLIT_STREAM, index);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for mut members in dataset.class_members() {
        members.shuffle(&mut rng);
        let n_test = members.len() / 3;
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// `n_folds` repeated 2/3–1/3 stratified splits. Each fold selects C on its
/// training part, reports held-out MMAE and the strong / weak set sizes.
pub fn run_benchmark(
    dataset: &Dataset,
    config: &AnalysisConfig,
    n_folds: usize,
) -> Result<ExperimentResult> {
    check_runs(n_folds, "fold")?;
    let mut runs = Vec::with_capacity(n_folds);
    for f in 0..n_folds as u64 {
        let seed = config.fit.seed.wrapping_add(f);
        let run = benchmark_fold(dataset, config, seed).map_err(|e| Error::RunFailed {
            seed,
            source: Box::new(e),
        })?;
        runs.push(run);
    }
    Ok(ExperimentResult::from_runs(ExperimentKind::Benchmark, runs))
}

fn benchmark_fold(dataset: &Dataset, config: &AnalysisConfig, seed: u64) -> Result<RunRecord> {
    let mut last = None;
    for attempt in 0..MAX_SPLIT_RETRIES {
        let (train_idx, test_idx) = stratified_split(dataset, seed, attempt);
        let train = match dataset.select(&train_idx) {
            Ok(t) => t,
            Err(e @ Error::EmptyClass { .. }) => {
                last = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let cfg = config.with_seed(seed);
        let model = fit_cv(&train, &cfg.fit)?;
        let report = analyze_with_model(&train, &model, cfg.delta, &cfg.probes)?;
        let predicted: Vec<usize> = test_idx
            .iter()
            .map(|&i| model.predict(dataset.row(i)))
            .collect::<Result<_>>()?;
        let actual: Vec<usize> = test_idx.iter().map(|&i| dataset.labels()[i]).collect();
        let mmae = if actual.is_empty() {
            None
        } else {
            Some(mmae_present(&predicted, &actual, dataset.n_classes())?)
        };
        let classes = report.classes();
        return Ok(RunRecord {
            seed,
            f_measure: None,
            mmae,
            selected_c: model.c,
            n_strong: count(&classes, RelevanceClass::StronglyRelevant),
            n_weak: count(&classes, RelevanceClass::WeaklyRelevant),
            classes,
        });
    }
    Err(last.unwrap_or_else(|| Error::InvalidDataset("no usable split".into())))
}

/// One row in the synthetic-results layout:
/// `n_points,n_strong,n_weak,n_irrelevant,runs,f_measure_mean,f_measure_std`.
pub fn write_synthetic_summary<W: Write>(
    out: W,
    spec: &GenSpec,
    result: &ExperimentResult,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n_points",
        "n_strong",
        "n_weak",
        "n_irrelevant",
        "runs",
        "f_measure_mean",
        "f_measure_std",
    ])?;
    let f = result.f_measure.unwrap_or(Summary { mean: f64::NAN, std: f64::NAN });
    w.write_record([
        spec.n_points.to_string(),
        spec.n_strong.to_string(),
        spec.n_weak.to_string(),
        spec.n_irrelevant.to_string(),
        result.runs.len().to_string(),
        format!("{:.4}", f.mean),
        format!("{:.4}", f.std),
    ])?;
    w.flush()?;
    Ok(())
}

/// One row in the benchmark-results layout:
/// `dataset,folds,mmae_mean,mmae_std,strong_mean,weak_mean`.
pub fn write_benchmark_summary<W: Write>(
    out: W,
    name: &str,
    result: &ExperimentResult,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dataset", "folds", "mmae_mean", "mmae_std", "strong_mean", "weak_mean"])?;
    let m = result.mmae.unwrap_or(Summary { mean: f64::NAN, std: f64::NAN });
    w.write_record([
        name.to_string(),
        result.runs.len().to_string(),
        format!("{:.4}", m.mean),
        format!("{:.4}", m.std),
        format!("{:.2}", result.n_strong.mean),
        format!("{:.2}", result.n_weak.mean),
    ])?;
    w.flush()?;
    Ok(())
}
