use ndarray::Array1;

use super::GabrielGraph;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Graph edge whose endpoints carry different labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportEdge {
    pub j: usize,
    pub k: usize,
    /// `(X_j + X_k) / 2`
    pub midpoint: Array1<f64>,
    pub class_j: usize,
    pub class_k: usize,
}

/// Structural support vector: an endpoint of at least one support edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Ssv {
    pub index: usize,
    pub center: Array1<f64>,
    pub class: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportStructure {
    pub support_edges: Vec<SupportEdge>,
    /// Ascending by `index`, no repeats.
    pub ssvs: Vec<Ssv>,
}

impl SupportStructure {
    pub fn ssv_count(&self) -> usize {
        self.ssvs.len()
    }

    pub fn edge_count(&self) -> usize {
        self.support_edges.len()
    }
}

/// Collects every cross-class edge of `graph` and its endpoints.
///
/// Indices refer to rows of `dataset`, which must be the dataset the
/// graph was built from. Returns [`Error::EmptySupport`] when no edge
/// crosses classes.
pub fn extract_support(graph: &GabrielGraph, dataset: &Dataset) -> Result<SupportStructure> {
    if graph.len() != dataset.len() {
        return Err(Error::GraphDatasetMismatch {
            graph: graph.len(),
            dataset: dataset.len(),
        });
    }
    let mut support_edges = Vec::new();
    let mut is_ssv = vec![false; graph.len()];
    for (j, k) in graph.edges() {
        let (class_j, class_k) = (dataset.label(j), dataset.label(k));
        if class_j == class_k {
            continue;
        }
        let midpoint = (&dataset.sample(j) + &dataset.sample(k)) / 2.0;
        support_edges.push(SupportEdge {
            j,
            k,
            midpoint,
            class_j,
            class_k,
        });
        is_ssv[j] = true;
        is_ssv[k] = true;
    }
    if support_edges.is_empty() {
        return Err(Error::EmptySupport);
    }
    let ssvs = is_ssv
        .iter()
        .enumerate()
        .filter(|(_, &flag)| flag)
        .map(|(index, _)| Ssv {
            index,
            center: dataset.sample(index).to_owned(),
            class: dataset.label(index),
        })
        .collect();
    Ok(SupportStructure {
        support_edges,
        ssvs,
    })
}
