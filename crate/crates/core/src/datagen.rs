//! Synthetic ordinal data with known strongly relevant, weakly relevant and
//! irrelevant features.
//!
//! Latent standard-normal variables define a random hyperplane; its score
//! plus Gaussian noise is cut into classes of equal frequency. Each strong
//! feature is one latent variable. A weak group shares one latent variable:
//! every member is a nonzero multiple of it, so any single member can stand
//! in for the others. Irrelevant features are independent noise.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenSpec {
    pub n_points: usize,
    pub n_strong: usize,
    pub n_weak: usize,
    pub n_irrelevant: usize,
    pub n_classes: usize,
    /// Noise stddev as a fraction of the noiseless score's stddev.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Sizes of the weak redundancy groups; defaults to one group holding
    /// all weak features.
    pub weak_groups: Option<Vec<usize>>,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            n_points: 100,
            n_strong: 1,
            n_weak: 0,
            n_irrelevant: 0,
            n_classes: 3,
            noise_sigma: 0.1,
            seed: 0,
            weak_groups: None,
        }
    }
}

impl GenSpec {
    pub fn new(n_points: usize, n_strong: usize, n_weak: usize, n_irrelevant: usize) -> Self {
        Self {
            n_points,
            n_strong,
            n_weak,
            n_irrelevant,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n_features(&self) -> usize {
        self.n_strong + self.n_weak + self.n_irrelevant
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        match &self.weak_groups {
            Some(g) => g.clone(),
            None if self.n_weak == 0 => Vec::new(),
            None => vec![self.n_weak],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_features() == 0 {
            return bad("need at least one feature".into());
        }
        if self.n_weak == 1 {
            return bad("weak features come in groups of at least 2".into());
        }
        let groups = self.group_sizes();
        if groups.iter().any(|&g| g < 2) || groups.iter().sum::<usize>() != self.n_weak {
            return bad(format!(
                "weak groups {groups:?} must each hold ≥ 2 features and sum to {}",
                self.n_weak
            ));
        }
        if self.n_classes < 2 {
            return bad(format!("need at least 2 classes, got {}", self.n_classes));
        }
        if self.n_points < 2 * self.n_classes {
            return bad(format!(
                "{} points cannot fill {} classes (need ≥ {})",
                self.n_points,
                self.n_classes,
                2 * self.n_classes
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be ≥ 0, got {}", self.noise_sigma));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakGroup {
    pub features: Vec<usize>,
    /// Index into `GroundTruth::latent_weights`.
    pub latent: usize,
    /// `feature[k] = mixing[k] · latent`.
    pub mixing: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub strong: Vec<usize>,
    pub weak: Vec<usize>,
    pub irrelevant: Vec<usize>,
    /// Hyperplane coefficients: strong latents first, then one per weak group.
    pub latent_weights: Vec<f64>,
    /// Latent index of each strong feature, aligned with `strong`.
    pub strong_latent: Vec<usize>,
    pub weak_groups: Vec<WeakGroup>,
    pub noise_std: f64,
    pub n_classes: usize,
    pub spec: GenSpec,
}

impl GroundTruth {
    /// Strongly and weakly relevant features together.
    pub fn relevant(&self) -> std::collections::BTreeSet<usize> {
        self.strong.iter().chain(&self.weak).copied().collect()
    }
}

fn coefficient<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let mag = rng.random_range(lo..=hi);
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

fn std_dev(values: &[f64]) -> f64 {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m).sqrt()
}

pub fn generate(spec: &GenSpec) -> Result<(Dataset, GroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let m = spec.n_points;
    let groups = spec.group_sizes();
    let n_latent = spec.n_strong + groups.len();

    let latents: Vec<Vec<f64>> = (0..n_latent)
        .map(|_| (0..m).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let latent_weights: Vec<f64> = (0..n_latent).map(|_| coefficient(&mut rng, 0.2, 1.0)).collect();
    let clean: Vec<f64> = (0..m)
        .map(|i| (0..n_latent).map(|k| latent_weights[k] * latents[k][i]).sum())
        .collect();
    let clean_sd = std_dev(&clean);
    let noise_std = if clean_sd > 0.0 {
        spec.noise_sigma * clean_sd
    } else {
        1.0
    };
    let score: Vec<f64> = clean
        .iter()
        .map(|c| {
            let e: f64 = rng.sample(StandardNormal);
            c + noise_std * e
        })
        .collect();
    let labels = equal_frequency_binning(&score, spec.n_classes)?;

    // Columns in generation order: strong, weak groups, irrelevant.
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(spec.n_features());
    for latent in latents.iter().take(spec.n_strong) {
        columns.push(latent.clone());
    }
    let mut group_mixing = Vec::with_capacity(groups.len());
    for (g, &size) in groups.iter().enumerate() {
        let latent = &latents[spec.n_strong + g];
        let mixing: Vec<f64> = (0..size).map(|_| coefficient(&mut rng, 0.5, 1.0)).collect();
        for &a in &mixing {
            columns.push(latent.iter().map(|v| a * v).collect());
        }
        group_mixing.push(mixing);
    }
    for _ in 0..spec.n_irrelevant {
        columns.push((0..m).map(|_| rng.sample(StandardNormal)).collect());
    }

    // position[k] = output column of generated column k.
    let n = columns.len();
    let mut position: Vec<usize> = (0..n).collect();
    position.shuffle(&mut rng);
    let mut features = vec![0.0; m * n];
    for (k, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            features[i * n + position[k]] = *v;
        }
    }

    let strong: Vec<usize> = (0..spec.n_strong).map(|k| position[k]).collect();
    let mut weak = Vec::with_capacity(spec.n_weak);
    let mut weak_groups = Vec::with_capacity(groups.len());
    let mut next = spec.n_strong;
    for (g, mixing) in group_mixing.into_iter().enumerate() {
        let members: Vec<usize> = (next..next + mixing.len()).map(|k| position[k]).collect();
        next += mixing.len();
        weak.extend(&members);
        weak_groups.push(WeakGroup {
            features: members,
            latent: spec.n_strong + g,
            mixing,
        });
    }
    let irrelevant: Vec<usize> = (next..n).map(|k| position[k]).collect();

    let dataset = Dataset::from_flat(n, features, labels, Some(spec.n_classes))?;
    let truth = GroundTruth {
        strong,
        weak,
        irrelevant,
        latent_weights,
        strong_latent: (0..spec.n_strong).collect(),
        weak_groups,
        noise_std,
        n_classes: spec.n_classes,
        spec: spec.clone(),
    };
    Ok((dataset, truth))
}

/// Labels `1..=n_bins` by rank: the first `m mod n_bins` bins take
/// `⌈m / n_bins⌉` samples, the rest `⌊m / n_bins⌋`. Ties keep sample order.
pub fn equal_frequency_binning(values: &[f64], n_bins: usize) -> Result<Vec<usize>> {
    let m = values.len();
    if n_bins == 0 || m < n_bins {
        return Err(Error::InvalidConfig(format!(
            "cannot bin {m} values into {n_bins} bins"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let (base, extra) = (m / n_bins, m % n_bins);
    let mut labels = vec![0; m];
    let mut rank = 0;
    for bin in 0..n_bins {
        let size = base + usize::from(bin < extra);
        for &i in &order[rank..rank + size] {
            labels[i] = bin + 1;
        }
        rank += size;
    }
    Ok(labels)
}
