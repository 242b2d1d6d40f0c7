use ndarray::Array2;

use super::model::{Architecture, CenterClasses, EdgeEndpoints, TrainedModel};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::{squared_distance, SupportStructure};
use crate::numeric::stable_sigmoid;
use crate::preprocess::Standardizer;

/// `+1` when `x` is nearer the positive endpoint, `-1` when nearer the
/// negative one. At equal distance the endpoint with the smaller sample
/// index wins.
pub fn chip_edge_weight(x: &[f64], edge: &EdgeEndpoints) -> f64 {
    let da = squared_distance(x, &edge.alpha);
    let db = squared_distance(x, &edge.beta);
    let positive = if da == db {
        edge.alpha_index < edge.beta_index
    } else {
        da < db
    };
    if positive {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn require_binary(architecture: Architecture, dataset: &Dataset) -> Result<()> {
    if dataset.class_count() != 2 {
        return Err(Error::Unsupported {
            architecture: architecture.to_string(),
            what: format!("{} classes (binary only)", dataset.class_count()),
        });
    }
    Ok(())
}

/// Collects the support edges of `support` as a chipclass model. Class 1
/// is the positive class. `dataset` is the (standardized, filtered)
/// training set whose graph produced `support`.
pub fn fit_chipclass(
    dataset: &Dataset,
    support: &SupportStructure,
    architecture: Architecture,
) -> Result<TrainedModel> {
    if !architecture.uses_edges() {
        return Err(Error::Unsupported {
            architecture: architecture.to_string(),
            what: "edge-centered fit".into(),
        });
    }
    require_binary(architecture, dataset)?;
    if support.support_edges.is_empty() {
        return Err(Error::EmptySupport);
    }
    let n = dataset.dim();
    let h = support.support_edges.len();
    let mut centers = Array2::zeros((h, n));
    let mut edges = Vec::with_capacity(h);
    for (row, e) in support.support_edges.iter().enumerate() {
        centers.row_mut(row).assign(&e.midpoint);
        let (a, b) = if e.class_j > e.class_k {
            (e.j, e.k)
        } else {
            (e.k, e.j)
        };
        edges.push(EdgeEndpoints {
            alpha_index: a,
            beta_index: b,
            alpha_class: dataset.label(a),
            beta_class: dataset.label(b),
            alpha: dataset.sample(a).to_vec(),
            beta: dataset.sample(b).to_vec(),
        });
    }
    Ok(TrainedModel {
        architecture,
        centers,
        center_classes: CenterClasses::Edges(edges),
        weights: None,
        preprocessing: Standardizer::identity(n),
        class_count: 2,
        class_labels: dataset.class_names().to_vec(),
        feature_names: dataset.feature_names().to_vec(),
        sigma_used: None,
        membership: None,
        filter_policy: None,
    })
}

/// Probability of the positive class for a raw query.
pub fn chipclass_predict(model: &TrainedModel, x: &[f64]) -> Result<f64> {
    if !model.architecture.uses_edges() {
        return Err(Error::Unsupported {
            architecture: model.architecture.to_string(),
            what: "chipclass prediction".into(),
        });
    }
    let z = model.preprocessing.transform_row(x)?;
    Ok(stable_sigmoid(model.decision_scores(&z)?[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, extract_support};
    use ndarray::array;

    fn edge(alpha_index: usize, beta_index: usize) -> EdgeEndpoints {
        EdgeEndpoints {
            alpha_index,
            beta_index,
            alpha_class: 1,
            beta_class: 0,
            alpha: vec![1.0, 0.0],
            beta: vec![-1.0, 0.0],
        }
    }

    #[test]
    fn weight_follows_nearest_endpoint() {
        assert_eq!(chip_edge_weight(&[1.0, 0.0], &edge(0, 1)), 1.0);
        assert_eq!(chip_edge_weight(&[-1.0, 0.0], &edge(0, 1)), -1.0);
        assert_eq!(chip_edge_weight(&[0.0, 5.0], &edge(0, 1)), 1.0);
        assert_eq!(chip_edge_weight(&[0.0, 5.0], &edge(3, 1)), -1.0);
    }

    #[test]
    fn two_point_model() {
        let d = Dataset::new(array![[0.0], [2.0]], vec![0, 1]).unwrap();
        let g = build_graph(&d).unwrap();
        let s = extract_support(&g, &d).unwrap();
        let m = fit_chipclass(&d, &s, Architecture::ChipclassExp).unwrap();
        assert!(chipclass_predict(&m, &[2.0]).unwrap() > 0.5);
        assert!(chipclass_predict(&m, &[0.0]).unwrap() < 0.5);
        m.validate().unwrap();
    }
}
