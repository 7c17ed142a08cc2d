//! Ordinal datasets and per-feature standardization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `m` samples in `R^n` with ordinal labels in `1..=l`, every class
/// populated.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_features: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
    n_classes: usize,
}

impl Dataset {
    /// Builds a dataset from row vectors. `n_classes` defaults to the largest
    /// label.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: Option<usize>) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_features) {
            return Err(Error::InvalidDataset(format!(
                "row {i} has {} features, expected {n_features}",
                r.len()
            )));
        }
        let features = rows.into_iter().flatten().collect();
        Self::from_flat(n_features, features, labels, n_classes)
    }

    /// Builds a dataset from a row-major feature buffer.
    pub fn from_flat(
        n_features: usize,
        features: Vec<f64>,
        labels: Vec<usize>,
        n_classes: Option<usize>,
    ) -> Result<Self> {
        let n_classes = n_classes.unwrap_or_else(|| labels.iter().copied().max().unwrap_or(0));
        let ds = Self {
            n_features,
            features,
            labels,
            n_classes,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        if self.n_features == 0 {
            return Err(Error::InvalidDataset("at least one feature is required".into()));
        }
        if self.features.len() != self.labels.len() * self.n_features {
            return Err(Error::InvalidDataset(format!(
                "{} feature values do not fill {} rows of {} features",
                self.features.len(),
                self.labels.len(),
                self.n_features
            )));
        }
        if self.n_classes < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 ordered classes, got {}",
                self.n_classes
            )));
        }
        if let Some(i) = self.features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value in row {}, feature {}",
                i / self.n_features,
                i % self.n_features
            )));
        }
        if let Some((i, l)) = self
            .labels
            .iter()
            .enumerate()
            .find(|(_, &l)| l == 0 || l > self.n_classes)
        {
            return Err(Error::InvalidDataset(format!(
                "label {l} of row {i} outside 1..={}",
                self.n_classes
            )));
        }
        if let Some(j) = self.class_counts().iter().position(|&c| c == 0) {
            return Err(Error::EmptyClass { class: j + 1 });
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.n_features)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        assert_eq!(values.len(), self.n_samples());
        for (i, v) in values.iter().enumerate() {
            self.features[i * self.n_features + j] = *v;
        }
    }

    /// `m_1..m_l`.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            if (1..=self.n_classes).contains(&l) {
                counts[l - 1] += 1;
            }
        }
        counts
    }

    /// Sample indices grouped by class (index 0 holds class 1).
    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.n_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            members[l - 1].push(i);
        }
        members
    }

    /// New dataset from the given sample indices; keeps the class count and
    /// fails if a class ends up empty.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::from_flat(self.n_features, features, labels, Some(self.n_classes))
    }

    /// New dataset keeping only the given feature columns, in order.
    pub fn select_features(&self, columns: &[usize]) -> Result<Self> {
        let features = self
            .rows()
            .flat_map(|r| columns.iter().map(move |&j| r[j]))
            .collect();
        Self::from_flat(columns.len(), features, self.labels.clone(), Some(self.n_classes))
    }

    /// Same samples with relabeled targets (used for null-hypothesis runs).
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        Self::from_flat(self.n_features, self.features.clone(), labels, Some(self.n_classes))
    }
}

/// Per-feature `(mean, stddev)` used to z-score inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    pub fn identity(n_features: usize) -> Self {
        Self {
            mean: vec![0.0; n_features],
            std: vec![1.0; n_features],
        }
    }

    /// Population moments of each column. Constant columns record stddev 1.
    pub fn fit(dataset: &Dataset) -> Self {
        let n = dataset.n_features();
        let m = dataset.n_samples() as f64;
        let mut mean = vec![0.0; n];
        for r in dataset.rows() {
            for (acc, v) in mean.iter_mut().zip(r) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m);
        let mut var = vec![0.0; n];
        for r in dataset.rows() {
            for j in 0..n {
                let d = r[j] - mean[j];
                var[j] += d * d;
            }
        }
        let mut std: Vec<f64> = var.iter().map(|v| (v / m).sqrt()).collect();
        for j in 0..n {
            let first = dataset.row(0)[j];
            if dataset.rows().all(|r| r[j] == first) {
                // Constant columns map to exact zeros.
                mean[j] = first;
                std[j] = 1.0;
            }
        }
        Self { mean, std }
    }

    pub fn is_identity(&self) -> bool {
        self.mean.iter().all(|&v| v == 0.0) && self.std.iter().all(|&v| v == 1.0)
    }

    pub fn apply_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (mu, sd))| (v - mu) / sd)
            .collect()
    }

    pub fn apply(&self, dataset: &Dataset) -> Dataset {
        if self.is_identity() {
            return dataset.clone();
        }
        let features = dataset.rows().flat_map(|r| self.apply_row(r)).collect();
        Dataset {
            n_features: dataset.n_features,
            features,
            labels: dataset.labels.clone(),
            n_classes: dataset.n_classes,
        }
    }
}

/// Z-scores every column; returns the transformed data and the moments used.
pub fn standardize(dataset: &Dataset) -> (Dataset, Standardization) {
    let stats = Standardization::fit(dataset);
    (stats.apply(dataset), stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(cols: &[&[f64]], labels: &[usize]) -> Dataset {
        let rows = (0..labels.len())
            .map(|i| cols.iter().map(|c| c[i]).collect())
            .collect();
        Dataset::new(rows, labels.to_vec(), None).unwrap()
    }

    #[test]
    fn symmetric_three_point_zscore() {
        let (z, stats) = standardize(&ds(&[&[1.0, 2.0, 3.0]], &[1, 2, 2]));
        let expected = [-1.224744871391589, 0.0, 1.224744871391589];
        for (a, b) in z.column(0).iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(stats.mean, vec![2.0]);
    }

    #[test]
    fn constant_column_maps_to_zero_with_unit_std() {
        let (z, stats) = standardize(&ds(&[&[5.0, 5.0, 5.0]], &[1, 2, 1]));
        assert_eq!(z.column(0), vec![0.0, 0.0, 0.0]);
        assert_eq!(stats.std, vec![1.0]);
    }

    #[test]
    fn rejects_empty_class_and_bad_labels() {
        let rows = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            Dataset::new(rows.clone(), vec![1, 3], None),
            Err(Error::EmptyClass { class: 2 })
        ));
        assert!(Dataset::new(rows.clone(), vec![1, 1], None).is_err());
        assert!(Dataset::new(rows, vec![0, 1], None).is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        let rows = vec![vec![f64::NAN], vec![1.0]];
        assert!(Dataset::new(rows, vec![1, 2], None).is_err());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let rows = vec![vec![0.0, 1.0], vec![1.0]];
        assert!(Dataset::new(rows, vec![1, 2], None).is_err());
    }

    #[test]
    fn select_keeps_class_count() {
        let d = ds(&[&[0.0, 1.0, 2.0, 3.0]], &[1, 2, 3, 3]);
        let s = d.select(&[0, 1, 3]).unwrap();
        assert_eq!(s.n_classes(), 3);
        assert_eq!(s.class_counts(), vec![1, 1, 1]);
        assert!(d.select(&[2, 3]).is_err());
    }
}
