//! Labelled sample matrix shared by every stage of the pipeline.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Feature matrix (one sample per row) with integer class labels in
/// `0..class_count`.
///
/// [`Dataset::new`] enforces the invariants the graph algorithms rely on:
/// finite values, pairwise distinct rows and every class populated.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    class_count: usize,
    class_names: Vec<String>,
    feature_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, inferring `class_count` as `max(label) + 1`.
    pub fn new(features: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        let class_count = labels.iter().copied().max().map_or(0, |c| c + 1);
        Self::with_class_count(features, labels, class_count)
    }

    pub fn with_class_count(
        features: Array2<f64>,
        labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self> {
        let dataset = Self::from_parts_unchecked(features, labels, class_count);
        dataset.validate()?;
        Ok(dataset)
    }

    /// Skips validation. Used for transformed copies of data that was
    /// already validated, and for query sets that are never graphed.
    pub(crate) fn from_parts_unchecked(
        features: Array2<f64>,
        labels: Vec<usize>,
        class_count: usize,
    ) -> Self {
        let features = if features.is_standard_layout() {
            features
        } else {
            features.as_standard_layout().into_owned()
        };
        let class_names = (0..class_count).map(|c| c.to_string()).collect();
        let feature_names = (0..features.ncols()).map(|j| format!("x{j}")).collect();
        Dataset {
            features,
            labels,
            class_count,
            class_names,
            feature_names,
        }
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.class_count {
            return Err(Error::DimensionMismatch {
                expected: self.class_count,
                actual: names.len(),
            });
        }
        self.class_names = names;
        Ok(self)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.labels.len() != self.features.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.features.nrows(),
                actual: self.labels.len(),
            });
        }
        for (row, sample) in self.features.outer_iter().enumerate() {
            if let Some(column) = sample.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row, column });
            }
        }
        let mut counts = vec![0usize; self.class_count];
        for &label in &self.labels {
            match counts.get_mut(label) {
                Some(count) => *count += 1,
                None => {
                    return Err(Error::InvalidLabel {
                        label,
                        class_count: self.class_count,
                    })
                }
            }
        }
        if let Some(class) = counts.iter().position(|&n| n == 0) {
            return Err(Error::EmptyClass(class));
        }
        let duplicates = find_duplicate_rows(self.features.view());
        if !duplicates.is_empty() {
            return Err(Error::DuplicateRows(duplicates));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Input dimension `n`.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn sample(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Number of samples in each class.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.class_count];
        for &label in &self.labels {
            counts[label] += 1;
        }
        counts
    }

    /// Rows `indices`, in the given order. Keeps `class_count` and names;
    /// a subset may leave some classes empty.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Replaces the feature matrix, keeping labels and class metadata.
    pub(crate) fn with_features(&self, features: Array2<f64>, feature_names: Vec<String>) -> Self {
        debug_assert_eq!(features.nrows(), self.len());
        Dataset {
            features,
            labels: self.labels.clone(),
            class_count: self.class_count,
            class_names: self.class_names.clone(),
            feature_names,
        }
    }
}

/// Pairs `(first, duplicate)` of rows with identical feature vectors,
/// sorted by the duplicate's index.
pub fn find_duplicate_rows(features: ArrayView2<'_, f64>) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..features.nrows()).collect();
    let row_cmp = |a: usize, b: usize| {
        features
            .row(a)
            .iter()
            .zip(features.row(b).iter())
            // `+ 0.0` folds -0.0 onto 0.0 so equal rows sort together
            .map(|(x, y)| (x + 0.0).total_cmp(&(y + 0.0)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    order.sort_by(|&a, &b| row_cmp(a, b).then(a.cmp(&b)));
    let same = |a: usize, b: usize| {
        features
            .row(a)
            .iter()
            .zip(features.row(b).iter())
            .all(|(x, y)| x == y)
    };

    let mut pairs = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && same(order[start], order[end]) {
            pairs.push((order[start], order[end]));
            end += 1;
        }
        start = end;
    }
    pairs.sort_by_key(|&(_, dup)| dup);
    pairs
}
