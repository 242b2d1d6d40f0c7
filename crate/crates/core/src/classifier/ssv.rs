use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::activation::tanh_activation;
use super::chipclass::require_binary;
use super::model::{Architecture, CenterClasses, TrainedModel};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::SupportStructure;
use crate::numeric::{log_sum_exp, solve_least_squares, LeastSquaresProblem};
use crate::preprocess::Standardizer;

/// Normalized tanh activations of every row of `x` against `centers`.
pub fn activation_matrix(
    x: ArrayView2<'_, f64>,
    centers: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    let rows: Vec<Vec<f64>> = (0..x.nrows())
        .into_par_iter()
        .map(|i| x.row(i))
        .map(|row| {
            match row.as_slice() {
                Some(r) => tanh_activation(r, centers),
                None => tanh_activation(&row.to_vec(), centers),
            }
            .map(|h| h.values)
        })
        .collect::<Result<_>>()?;
    Ok(Array2::from_shape_fn(
        (rows.len(), centers.nrows()),
        |(i, k)| rows[i][k],
    ))
}

fn ssv_centers(dataset: &Dataset, support: &SupportStructure) -> Result<(Array2<f64>, Vec<usize>)> {
    if support.ssvs.len() < 2 {
        return Err(Error::EmptySupport);
    }
    let mut centers = Array2::zeros((support.ssvs.len(), dataset.dim()));
    for (row, s) in support.ssvs.iter().enumerate() {
        centers.row_mut(row).assign(&s.center);
    }
    Ok((centers, support.ssvs.iter().map(|s| s.class).collect()))
}

fn ssv_model(
    architecture: Architecture,
    dataset: &Dataset,
    centers: Array2<f64>,
    classes: Vec<usize>,
    weights: Array2<f64>,
) -> TrainedModel {
    TrainedModel {
        architecture,
        centers,
        center_classes: CenterClasses::Classes(classes),
        weights: Some(weights),
        preprocessing: Standardizer::identity(dataset.dim()),
        class_count: dataset.class_count(),
        class_labels: dataset.class_names().to_vec(),
        feature_names: dataset.feature_names().to_vec(),
        sigma_used: None,
        membership: None,
        filter_policy: None,
    }
}

/// Least-squares output weight on SSV-centered tanh activations with
/// targets `+1` (class 1) and `-1` (class 0).
pub fn fit_ssv_binary(dataset: &Dataset, support: &SupportStructure) -> Result<TrainedModel> {
    require_binary(Architecture::SsvBinary, dataset)?;
    let (centers, classes) = ssv_centers(dataset, support)?;
    let h = activation_matrix(dataset.features(), centers.view())?;
    let y = Array2::from_shape_fn((dataset.len(), 1), |(i, _)| {
        if dataset.label(i) == 1 {
            1.0
        } else {
            -1.0
        }
    });
    let w = solve_least_squares(&LeastSquaresProblem::new(h.view(), y.view()))?;
    Ok(ssv_model(
        Architecture::SsvBinary,
        dataset,
        centers,
        classes,
        w,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TrainingMode {
    #[default]
    Pseudoinverse,
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GradientInit {
    #[default]
    Pseudoinverse,
    Zeros,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GradientOptions {
    pub step: f64,
    pub max_epochs: usize,
    /// Stop once an accepted step lowers the loss by less than this.
    pub tolerance: f64,
    pub init: GradientInit,
}

impl Default for GradientOptions {
    fn default() -> Self {
        GradientOptions {
            step: 0.1,
            max_epochs: 500,
            tolerance: 1e-6,
            init: GradientInit::Pseudoinverse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub mode: TrainingMode,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub epochs: usize,
    pub converged: bool,
    /// Loss after each accepted step, starting with the initial loss.
    pub losses: Vec<f64>,
}

/// Mean softmax cross-entropy of `h · w` against `labels`.
pub fn cross_entropy(h: ArrayView2<'_, f64>, w: ArrayView2<'_, f64>, labels: &[usize]) -> f64 {
    let logits = h.dot(&w);
    let total: f64 = logits
        .outer_iter()
        .zip(labels)
        .map(|(z, &y)| log_sum_exp(z.as_slice().expect("fresh array")) - z[y])
        .sum();
    total / labels.len() as f64
}

fn cross_entropy_gradient(
    h: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
    labels: &[usize],
) -> Array2<f64> {
    let mut p = h.dot(&w);
    for (mut row, &y) in p.outer_iter_mut().zip(labels) {
        crate::numeric::softmax_in_place(row.as_slice_mut().expect("fresh array"));
        row[y] -= 1.0;
    }
    h.t().dot(&p) / labels.len() as f64
}

/// SSV-centered network with a softmax output over all classes.
///
/// Pseudoinverse mode solves against one-hot targets. Gradient mode runs
/// full-batch descent on the cross-entropy, halving the step whenever a
/// step would raise the loss; each attempted step counts as an epoch.
pub fn fit_multiclass(
    dataset: &Dataset,
    support: &SupportStructure,
    mode: TrainingMode,
    options: &GradientOptions,
) -> Result<(TrainedModel, TrainingReport)> {
    let c = dataset.class_count();
    if c < 2 {
        return Err(Error::Unsupported {
            architecture: Architecture::SsvMulticlass.to_string(),
            what: "fewer than two classes".into(),
        });
    }
    let (centers, classes) = ssv_centers(dataset, support)?;
    let h = activation_matrix(dataset.features(), centers.view())?;
    let labels = dataset.labels();

    let pinv = || {
        let y = Array2::from_shape_fn(
            (dataset.len(), c),
            |(i, k)| if labels[i] == k { 1.0 } else { 0.0 },
        );
        solve_least_squares(&LeastSquaresProblem::new(h.view(), y.view()))
    };
    let mut w = match (mode, options.init) {
        (TrainingMode::Gradient, GradientInit::Zeros) => Array2::zeros((centers.nrows(), c)),
        _ => pinv()?,
    };
    let initial_loss = cross_entropy(h.view(), w.view(), labels);
    let mut losses = vec![initial_loss];
    let mut epochs = 0;
    let mut converged = true;

    if mode == TrainingMode::Gradient {
        if !(options.step > 0.0) || !(options.tolerance >= 0.0) {
            return Err(Error::Config(
                "gradient step must be positive and tolerance non-negative".into(),
            ));
        }
        converged = false;
        let mut step = options.step;
        let mut loss = initial_loss;
        let mut grad = cross_entropy_gradient(h.view(), w.view(), labels);
        while epochs < options.max_epochs {
            epochs += 1;
            let candidate = &w - &(&grad * step);
            let next = cross_entropy(h.view(), candidate.view(), labels);
            if !(next <= loss) {
                step /= 2.0;
                if step < f64::EPSILON * options.step {
                    converged = true;
                    break;
                }
                continue;
            }
            let improvement = loss - next;
            w = candidate;
            loss = next;
            losses.push(loss);
            if improvement < options.tolerance {
                converged = true;
                break;
            }
            grad = cross_entropy_gradient(h.view(), w.view(), labels);
        }
        if !converged {
            log::warn!("gradient training stopped after {epochs} epochs without converging");
        }
    }

    let report = TrainingReport {
        mode,
        initial_loss,
        final_loss: *losses.last().expect("initial loss recorded"),
        epochs,
        converged,
        losses,
    };
    Ok((
        ssv_model(Architecture::SsvMulticlass, dataset, centers, classes, w),
        report,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, extract_support};
    use ndarray::array;

    fn two_points() -> (Dataset, SupportStructure) {
        let d = Dataset::new(array![[0.0, 0.0], [1.0, 1.0]], vec![0, 1]).unwrap();
        let g = build_graph(&d).unwrap();
        let s = extract_support(&g, &d).unwrap();
        (d, s)
    }

    #[test]
    fn binary_fit_cancels_at_midpoint() {
        let (d, s) = two_points();
        let m = fit_ssv_binary(&d, &s).unwrap();
        let score = m.decision_scores(&[0.5, 0.5]).unwrap()[0];
        assert!(score.abs() < 1e-12);
        assert!(m.predict_proba(&[1.0, 1.0]).unwrap()[1] > 0.5);
    }

    #[test]
    fn gradient_never_increases_loss() {
        let (d, s) = two_points();
        let opts = GradientOptions {
            init: GradientInit::Zeros,
            ..Default::default()
        };
        let (_, r) = fit_multiclass(&d, &s, TrainingMode::Gradient, &opts).unwrap();
        assert!(r.losses.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.final_loss < r.initial_loss);
    }
}
