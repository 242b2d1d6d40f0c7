//! Per-feature z-scoring fitted on training rows.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Column statistics of a training set. Constant columns are dropped:
/// `kept[j]` is the input column behind output column `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub input_dim: usize,
    pub kept: Vec<usize>,
    pub means: Vec<f64>,
    /// Population standard deviations, all positive.
    pub stds: Vec<f64>,
}

impl Standardizer {
    /// Pass-through for data that is already on a common scale.
    pub fn identity(dim: usize) -> Self {
        Standardizer {
            input_dim: dim,
            kept: (0..dim).collect(),
            means: vec![0.0; dim],
            stds: vec![1.0; dim],
        }
    }

    pub fn fit(train: &Dataset) -> Result<Self> {
        if train.len() < 2 {
            return Err(Error::TooFewSamples {
                required: 2,
                actual: train.len(),
            });
        }
        let x = train.features();
        let m = x.nrows() as f64;
        let (mut kept, mut means, mut stds) = (Vec::new(), Vec::new(), Vec::new());
        for (j, column) in x.columns().into_iter().enumerate() {
            let first = column[0];
            if column.iter().all(|&v| v == first) {
                log::warn!("dropping constant feature '{}'", train.feature_names()[j]);
                continue;
            }
            let mean = column.sum() / m;
            let var = column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
            kept.push(j);
            means.push(mean);
            stds.push(var.sqrt());
        }
        if kept.is_empty() {
            return Err(Error::NoFeatureVariance);
        }
        Ok(Standardizer {
            input_dim: x.ncols(),
            kept,
            means,
            stds,
        })
    }

    pub fn output_dim(&self) -> usize {
        self.kept.len()
    }

    pub fn dropped(&self) -> Vec<usize> {
        (0..self.input_dim)
            .filter(|j| !self.kept.contains(j))
            .collect()
    }

    pub fn transform_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        Ok(self
            .kept
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&j, (mean, std))| (x[j] - mean) / std)
            .collect())
    }

    /// Standardized copy of `dataset`. Rows are not re-checked for
    /// duplicates; see [`Standardizer::transform_checked`].
    pub fn transform(&self, dataset: &Dataset) -> Result<Dataset> {
        if dataset.dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: dataset.dim(),
            });
        }
        let x = dataset.features();
        let z = Array2::from_shape_fn((x.nrows(), self.kept.len()), |(i, j)| {
            (x[[i, self.kept[j]]] - self.means[j]) / self.stds[j]
        });
        let names = self
            .kept
            .iter()
            .map(|&j| dataset.feature_names()[j].clone())
            .collect();
        Ok(dataset.with_features(z, names))
    }

    /// [`Standardizer::transform`] followed by full validation, for data
    /// that will be graphed. Two rows that differ only in dropped columns,
    /// or collide after rounding, are reported as duplicates.
    pub fn transform_checked(&self, dataset: &Dataset) -> Result<Dataset> {
        let z = self.transform(dataset)?;
        let (features, labels, c) = (
            z.features().to_owned(),
            z.labels().to_vec(),
            z.class_count(),
        );
        Dataset::with_class_count(features, labels, c)?
            .with_class_names(z.class_names().to_vec())?
            .with_feature_names(z.feature_names().to_vec())
    }
}

/// Fits on `train` and standardizes both sets with the training statistics.
pub fn standardize(train: &Dataset, apply_to: &Dataset) -> Result<(Dataset, Standardizer)> {
    let stats = Standardizer::fit(train)?;
    Ok((stats.transform(apply_to)?, stats))
}
