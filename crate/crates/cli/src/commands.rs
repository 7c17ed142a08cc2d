use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use ordrel::datagen::{generate, GenSpec};
use ordrel::eval::{
    run_benchmark, run_synthetic_experiment, write_benchmark_summary, write_synthetic_summary,
    ExperimentResult,
};
use ordrel::io::{read_dataset, write_dataset_to, LabelColumn, LoadedDataset, ReadOptions};
use ordrel::ordinal::{default_c_grid, FitConfig};
use ordrel::probes::{analyze, AnalysisConfig, ProbeConfig, RelevanceReport};
use ordrel::relevance::{to_raw_units, DEFAULT_DELTA};

use crate::args::{AnalysisArgs, BenchArgs, GenArgs, RelevanceArgs};

/// A failed command and the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

impl Failure {
    pub fn input(message: impl Display) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }

    pub fn internal(message: impl Display) -> Self {
        Self {
            code: EXIT_INTERNAL,
            message: message.to_string(),
        }
    }
}

fn is_internal(e: &ordrel::Error) -> bool {
    use ordrel::Error as E;
    match e {
        E::Lp(_) | E::UnexpectedStatus { .. } => true,
        E::RunFailed { source, .. } => is_internal(source),
        _ => false,
    }
}

impl From<ordrel::Error> for Failure {
    fn from(e: ordrel::Error) -> Self {
        if is_internal(&e) {
            Self::internal(e)
        } else {
            Self::input(e)
        }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

/// Everything needed to reproduce a run. Embedded in every JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub params: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    fn new<P: Serialize>(command: &str, params: &P, inputs: Vec<PathBuf>, outputs: Vec<PathBuf>) -> CmdResult<Self> {
        Ok(Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            params: serde_json::to_value(params).map_err(Failure::internal)?,
            inputs,
            outputs,
        })
    }
}

/// Where outputs land: their recorded paths, or the same file names under a
/// replay directory.
#[derive(Debug, Clone, Default)]
pub struct Destination {
    pub out_dir: Option<PathBuf>,
}

impl Destination {
    fn resolve(&self, path: &Path) -> PathBuf {
        match (&self.out_dir, path.file_name()) {
            (Some(dir), Some(name)) => dir.join(name),
            _ => path.to_path_buf(),
        }
    }

    fn write(&self, path: &Path, bytes: &[u8]) -> CmdResult {
        let target = self.resolve(path);
        fs::write(&target, bytes)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", target.display())))
    }

    fn write_json(&self, path: &Path, value: &serde_json::Value) -> CmdResult {
        let mut text = serde_json::to_string_pretty(value).map_err(Failure::internal)?;
        text.push('\n');
        self.write(path, text.as_bytes())
    }
}

fn required<T>(value: Option<T>, flag: &str) -> CmdResult<T> {
    value.ok_or_else(|| Failure::input(format!("--{flag} is required")))
}

fn with_extension(path: &Path, ext: &str) -> PathBuf {
    let mut p = path.to_path_buf();
    p.set_extension(ext);
    p
}

// ---- gen ----

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenParams {
    pub spec: GenSpec,
    pub out: PathBuf,
    pub truth: PathBuf,
}

pub fn resolve_gen(args: GenArgs) -> CmdResult<GenParams> {
    let d = GenSpec::default();
    let spec = GenSpec {
        n_points: required(args.points, "points")?,
        n_strong: args.strong.unwrap_or(0),
        n_weak: args.weak.unwrap_or(0),
        n_irrelevant: args.irrelevant.unwrap_or(0),
        n_classes: args.classes.unwrap_or(d.n_classes),
        noise_sigma: args.noise.unwrap_or(d.noise_sigma),
        seed: args.seed.unwrap_or(0),
        weak_groups: args.weak_groups,
    };
    spec.validate()?;
    let out = required(args.out, "out")?;
    let truth = args.truth.unwrap_or_else(|| with_extension(&out, "truth.json"));
    Ok(GenParams { spec, out, truth })
}

pub fn run_gen(params: &GenParams, dest: &Destination) -> CmdResult {
    let (data, truth) = generate(&params.spec)?;
    let manifest = RunManifest::new(
        "gen",
        params,
        vec![],
        vec![params.out.clone(), params.truth.clone()],
    )?;
    let mut csv = Vec::new();
    write_dataset_to(&mut csv, &data)?;
    dest.write(&params.out, &csv)?;
    dest.write_json(&params.truth, &json!({ "manifest": manifest, "truth": truth }))?;
    println!(
        "wrote {} samples × {} features ({} classes) to {}",
        data.n_samples(),
        data.n_features(),
        data.n_classes(),
        dest.resolve(&params.out).display()
    );
    println!(
        "strong {:?}  weak {:?}  irrelevant {:?}",
        truth.strong, truth.weak, truth.irrelevant
    );
    Ok(())
}

// ---- shared analysis settings ----

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReadParams {
    pub label_col: Option<String>,
    pub relabel: bool,
}

impl ReadParams {
    fn options(&self) -> ReadOptions {
        ReadOptions {
            label_column: self.label_col.as_deref().map(LabelColumn::parse),
            relabel: self.relabel,
        }
    }

    fn load(&self, path: &Path) -> CmdResult<LoadedDataset> {
        Ok(read_dataset(path, &self.options())?)
    }
}

fn resolve_analysis(args: &AnalysisArgs) -> CmdResult<(AnalysisConfig, ReadParams)> {
    let seed = args.seed.unwrap_or(0);
    let fit = FitConfig {
        c_grid: args.c_grid.clone().unwrap_or_else(default_c_grid),
        k_folds: args.cv_folds.unwrap_or(5),
        seed,
        standardize: !args.no_standardize,
    };
    fit.validate()?;
    let defaults = ProbeConfig::default();
    let probes = ProbeConfig {
        d: args.d.unwrap_or(defaults.d),
        r_fp: args.rfp.unwrap_or(defaults.r_fp),
        seed,
    };
    probes.validate()?;
    let delta = args.delta.unwrap_or(DEFAULT_DELTA);
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Failure::input(format!("--delta must be ≥ 0, got {delta}")));
    }
    let read = ReadParams {
        label_col: args.label_col.clone(),
        relabel: args.relabel,
    };
    Ok((AnalysisConfig { fit, delta, probes }, read))
}

// ---- relevance ----

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelevanceParams {
    pub data: PathBuf,
    pub read: ReadParams,
    pub analysis: AnalysisConfig,
    pub raw_units: bool,
    pub out: PathBuf,
    pub intervals: PathBuf,
    pub plot_data: Option<PathBuf>,
}

pub fn resolve_relevance(args: RelevanceArgs) -> CmdResult<RelevanceParams> {
    let (analysis, read) = resolve_analysis(&args.analysis)?;
    let out = required(args.out, "out")?;
    Ok(RelevanceParams {
        data: required(args.data, "data")?,
        read,
        analysis,
        raw_units: args.raw_units,
        intervals: args.intervals.unwrap_or_else(|| with_extension(&out, "csv")),
        plot_data: args.plot_data,
        out,
    })
}

#[derive(Debug, Serialize)]
struct IntervalRow<'a> {
    feature: usize,
    name: &'a str,
    lower: f64,
    upper: f64,
    class: &'static str,
}

pub fn run_relevance(params: &RelevanceParams, dest: &Destination) -> CmdResult {
    let loaded = params.read.load(&params.data)?;
    let report = analyze(&loaded.dataset, &params.analysis)?;
    let mut outputs = vec![params.out.clone(), params.intervals.clone()];
    outputs.extend(params.plot_data.clone());
    let manifest = RunManifest::new("relevance", params, vec![params.data.clone()], outputs)?;

    let (intervals, thresholds) = reported_units(&report, params.raw_units);
    let rows: Vec<IntervalRow> = report
        .features
        .iter()
        .zip(&intervals)
        .map(|(f, iv)| IntervalRow {
            feature: f.feature,
            name: &loaded.feature_names[f.feature],
            lower: iv.lower,
            upper: iv.upper,
            class: f.class.as_str(),
        })
        .collect();

    dest.write_json(
        &params.out,
        &json!({
            "manifest": manifest,
            "feature_names": loaded.feature_names,
            "units": if params.raw_units { "raw" } else { "standardized" },
            "intervals": rows,
            "report": report,
        }),
    )?;
    dest.write(&params.intervals, &csv_bytes(&rows)?)?;
    if let Some(plot) = &params.plot_data {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["feature", "name", "lower", "upper", "class", "threshold"])
            .map_err(Failure::internal)?;
        for (row, t) in rows.iter().zip(&thresholds) {
            w.write_record([
                row.feature.to_string(),
                row.name.to_string(),
                row.lower.to_string(),
                row.upper.to_string(),
                row.class.to_string(),
                t.to_string(),
            ])
            .map_err(Failure::internal)?;
        }
        dest.write(plot, &w.into_inner().map_err(Failure::internal)?)?;
    }

    println!(
        "C = {}  mu_X = {:.6}  threshold = {:.6}",
        report.c, report.mu_x, report.threshold
    );
    for row in &rows {
        println!(
            "{:>4} {:<12} [{:>10.6}, {:>10.6}]  {}",
            row.feature, row.name, row.lower, row.upper, row.class
        );
    }
    Ok(())
}

/// Intervals and per-feature thresholds in the requested units. In raw units
/// each feature's threshold is rescaled like its interval.
fn reported_units(
    report: &RelevanceReport,
    raw: bool,
) -> (Vec<ordrel::RelevanceInterval>, Vec<f64>) {
    let intervals = report.intervals();
    let n = intervals.len();
    if !raw {
        return (intervals, vec![report.threshold; n]);
    }
    let std = &report.model.standardization.std;
    let thresholds = (0..n).map(|i| report.threshold / std[i]).collect();
    (to_raw_units(&intervals, &report.model), thresholds)
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> CmdResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(Failure::internal)?;
    }
    w.into_inner().map_err(Failure::internal)
}

// ---- bench ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchSource {
    Synthetic {
        spec_path: Option<PathBuf>,
        spec: GenSpec,
        runs: usize,
    },
    Benchmark {
        data: PathBuf,
        read: ReadParams,
        folds: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchParams {
    pub source: BenchSource,
    pub analysis: AnalysisConfig,
    pub out: PathBuf,
    pub summary: PathBuf,
}

pub fn resolve_bench(args: BenchArgs) -> CmdResult<BenchParams> {
    let (analysis, read) = resolve_analysis(&args.analysis)?;
    let source = match (args.spec, args.data) {
        (Some(path), None) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
            let mut spec: GenSpec = toml::from_str(&text)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            if let Some(seed) = args.analysis.seed {
                spec.seed = seed;
            }
            spec.validate()?;
            BenchSource::Synthetic {
                spec_path: Some(path),
                spec,
                runs: args.runs.unwrap_or(30),
            }
        }
        (None, Some(data)) => BenchSource::Benchmark {
            data,
            read,
            folds: args.folds.unwrap_or(30),
        },
        (Some(_), Some(_)) => return Err(Failure::input("--spec and --data are exclusive")),
        (None, None) => return Err(Failure::input("one of --spec or --data is required")),
    };
    let out = required(args.out, "out")?;
    Ok(BenchParams {
        source,
        analysis,
        summary: args.summary.unwrap_or_else(|| with_extension(&out, "csv")),
        out,
    })
}

pub fn run_bench(params: &BenchParams, dest: &Destination) -> CmdResult {
    let outputs = vec![params.out.clone(), params.summary.clone()];
    let mut summary = Vec::new();
    let (result, inputs): (ExperimentResult, Vec<PathBuf>) = match &params.source {
        BenchSource::Synthetic {
            spec_path,
            spec,
            runs,
        } => {
            let result = run_synthetic_experiment(spec, &params.analysis, *runs)?;
            write_synthetic_summary(&mut summary, spec, &result)?;
            (result, spec_path.iter().cloned().collect())
        }
        BenchSource::Benchmark { data, read, folds } => {
            let loaded = read.load(data)?;
            let result = run_benchmark(&loaded.dataset, &params.analysis, *folds)?;
            let name = data
                .file_stem()
                .map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned());
            write_benchmark_summary(&mut summary, &name, &result)?;
            (result, vec![data.clone()])
        }
    };
    let manifest = RunManifest::new("bench", params, inputs, outputs)?;
    dest.write_json(&params.out, &json!({ "manifest": manifest, "result": result }))?;
    dest.write(&params.summary, &summary)?;
    print!("{}", String::from_utf8_lossy(&summary));
    Ok(())
}

// ---- replay ----

pub fn load_manifest(path: &Path) -> CmdResult<RunManifest> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    if let Some(m) = value.get_mut("manifest") {
        value = m.take();
    }
    serde_json::from_value(value)
        .map_err(|e| Failure::input(format!("{}: not a run manifest: {e}", path.display())))
}

fn params_of<P: for<'de> Deserialize<'de>>(manifest: &RunManifest) -> CmdResult<P> {
    serde_json::from_value(manifest.params.clone()).map_err(|e| {
        Failure::input(format!("manifest parameters for {:?}: {e}", manifest.command))
    })
}

pub fn replay(manifest: &RunManifest, dest: &Destination) -> CmdResult {
    if manifest.version != env!("CARGO_PKG_VERSION") {
        eprintln!(
            "warning: manifest written by version {}, replaying with {}",
            manifest.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    match manifest.command.as_str() {
        "gen" => run_gen(&params_of(manifest)?, dest),
        "relevance" => run_relevance(&params_of(manifest)?, dest),
        "bench" => run_bench(&params_of(manifest)?, dest),
        other => Err(Failure::input(format!("unknown command {other:?} in manifest"))),
    }
}
