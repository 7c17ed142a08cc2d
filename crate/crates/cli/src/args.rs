//! Command-line flags and their config-file mirror.
//!
//! Every flag struct doubles as the schema for a TOML config file: keys are
//! the long flag names. A flag given on the command line wins over the file.
//! Unknown keys are rejected against the clap definition, since serde cannot
//! deny them through flattened structs.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "ordrel", version, about = "Feature relevance intervals for linear ordinal regression")]
pub struct Cli {
    /// Worker threads for the LP solves (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// TOML file whose keys mirror the long flags of the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with known relevant features.
    Gen(GenArgs),
    /// Fit, compute relevance intervals and classify every feature.
    Relevance(RelevanceArgs),
    /// Repeated synthetic runs (--spec) or benchmark splits (--data).
    Bench(BenchArgs),
    /// Re-run the command recorded in a manifest or report.
    Replay(ReplayArgs),
}

/// Fills every `None` in `self` from `file`; boolean switches are or-ed.
pub trait Overlay {
    fn overlay(self, file: Self) -> Self;
}

macro_rules! overlay {
    ($ty:ty; $($opt:ident),*; $($flag:ident),*) => {
        impl Overlay for $ty {
            fn overlay(self, file: Self) -> Self {
                Self {
                    $($opt: self.$opt.or(file.$opt),)*
                    $($flag: self.$flag || file.$flag,)*
                }
            }
        }
    };
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct GenArgs {
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub strong: Option<usize>,
    #[arg(long)]
    pub weak: Option<usize>,
    #[arg(long)]
    pub irrelevant: Option<usize>,
    #[arg(long)]
    pub classes: Option<usize>,
    /// Noise stddev relative to the noiseless score stddev.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Sizes of the weak groups, e.g. `3,2`.
    #[arg(long, value_delimiter = ',')]
    pub weak_groups: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dataset CSV to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ground-truth JSON (default: `<out>.truth.json`).
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

overlay!(GenArgs; points, strong, weak, irrelevant, classes, noise, weak_groups, seed, out, truth;);

/// Settings shared by `relevance` and `bench`.
#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct AnalysisArgs {
    /// Relative slack on the baseline objective.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of permutation probes.
    #[arg(long)]
    pub d: Option<usize>,
    /// Tolerated false-positive rate for the probe threshold.
    #[arg(long)]
    pub rfp: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Candidate C values, e.g. `0.1,1,10`.
    #[arg(long, value_delimiter = ',')]
    pub c_grid: Option<Vec<f64>>,
    /// Cross-validation folds for choosing C.
    #[arg(long)]
    pub cv_folds: Option<usize>,
    #[arg(long)]
    pub no_standardize: bool,
    /// Label column: header name or zero-based index.
    #[arg(long)]
    pub label_col: Option<String>,
    /// Map distinct label values onto 1..l in increasing order.
    #[arg(long)]
    pub relabel: bool,
}

overlay!(AnalysisArgs; delta, d, rfp, seed, c_grid, cv_folds, label_col; no_standardize, relabel);

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct RelevanceArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Report JSON to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Interval CSV (default: `<out>` with a `.csv` extension).
    #[arg(long)]
    pub intervals: Option<PathBuf>,
    /// Also write a plot-ready (feature, lower, upper, class, threshold) CSV.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    /// Report intervals in raw feature units instead of standardized ones.
    #[arg(long)]
    pub raw_units: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub analysis: AnalysisArgs,
}

impl Overlay for RelevanceArgs {
    fn overlay(self, file: Self) -> Self {
        Self {
            data: self.data.or(file.data),
            out: self.out.or(file.out),
            intervals: self.intervals.or(file.intervals),
            plot_data: self.plot_data.or(file.plot_data),
            raw_units: self.raw_units || file.raw_units,
            analysis: self.analysis.overlay(file.analysis),
        }
    }
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct BenchArgs {
    /// Benchmark dataset CSV (repeated 2/3–1/3 splits).
    #[arg(long, conflicts_with = "spec")]
    pub data: Option<PathBuf>,
    /// Generator spec TOML (repeated synthetic runs).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Synthetic runs.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Benchmark splits.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Result JSON to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary CSV (default: `<out>` with a `.csv` extension).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub analysis: AnalysisArgs,
}

impl Overlay for BenchArgs {
    fn overlay(self, file: Self) -> Self {
        Self {
            data: self.data.or(file.data),
            spec: self.spec.or(file.spec),
            runs: self.runs.or(file.runs),
            folds: self.folds.or(file.folds),
            out: self.out.or(file.out),
            summary: self.summary.or(file.summary),
            analysis: self.analysis.overlay(file.analysis),
        }
    }
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Manifest JSON, or any report that embeds one.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write outputs under this directory instead of their recorded paths.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
