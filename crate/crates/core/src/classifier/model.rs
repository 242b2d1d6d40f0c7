use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::activation::{chip_activation, tanh_activation, ActivationVector};
use super::chipclass::chip_edge_weight;
use crate::error::{Error, Result};
use crate::numeric::{softmax_in_place, stable_sigmoid};
use crate::preprocess::Standardizer;
use crate::regularization::{FilterPolicy, MembershipKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    /// Midpoint centers, exponential activation, per-query edge weights.
    ChipclassExp,
    /// Midpoint centers, shifted-tanh activation, per-query edge weights.
    ChipclassTanh,
    /// SSV centers, tanh activation, least-squares output weight.
    SsvBinary,
    /// SSV centers, tanh activation, softmax output over `c` classes.
    SsvMulticlass,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [
        Architecture::ChipclassExp,
        Architecture::ChipclassTanh,
        Architecture::SsvBinary,
        Architecture::SsvMulticlass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::ChipclassExp => "chipclass-exp",
            Architecture::ChipclassTanh => "chipclass-tanh",
            Architecture::SsvBinary => "ssv-binary",
            Architecture::SsvMulticlass => "ssv-multiclass",
        }
    }

    pub fn is_binary(self) -> bool {
        self != Architecture::SsvMulticlass
    }

    pub fn uses_edges(self) -> bool {
        matches!(
            self,
            Architecture::ChipclassExp | Architecture::ChipclassTanh
        )
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown architecture '{s}'")))
    }
}

/// Both ends of a support edge. `alpha` belongs to the positive class
/// (the larger class id), `beta` to the negative one. Indices are the
/// training-sample indices the edge was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEndpoints {
    pub alpha_index: usize,
    pub beta_index: usize,
    pub alpha_class: usize,
    pub beta_class: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CenterClasses {
    /// Class of each SSV center.
    Classes(Vec<usize>),
    /// Endpoints of the edge behind each midpoint center.
    Edges(Vec<EdgeEndpoints>),
}

impl CenterClasses {
    pub fn len(&self) -> usize {
        match self {
            CenterClasses::Classes(c) => c.len(),
            CenterClasses::Edges(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A fitted network. Centers and edge endpoints live in the standardized
/// space produced by `preprocessing`; queries are given in raw units.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub architecture: Architecture,
    pub centers: Array2<f64>,
    pub center_classes: CenterClasses,
    /// `h × 1` for ssv-binary, `h × c` for ssv-multiclass.
    pub weights: Option<Array2<f64>>,
    pub preprocessing: Standardizer,
    pub class_count: usize,
    pub class_labels: Vec<String>,
    /// Names of the raw input columns.
    pub feature_names: Vec<String>,
    pub sigma_used: Option<f64>,
    pub membership: Option<MembershipKind>,
    pub filter_policy: Option<FilterPolicy>,
}

impl TrainedModel {
    pub fn center_count(&self) -> usize {
        self.centers.nrows()
    }

    /// Replaces the identity preprocessing set at fit time. The model's
    /// centers must already be expressed in `preprocessing`'s output space.
    pub fn with_preprocessing(
        mut self,
        preprocessing: Standardizer,
        feature_names: Vec<String>,
    ) -> Self {
        self.preprocessing = preprocessing;
        self.feature_names = feature_names;
        self
    }

    pub fn with_regularization(
        mut self,
        membership: MembershipKind,
        sigma: f64,
        policy: FilterPolicy,
    ) -> Self {
        self.sigma_used = (membership == MembershipKind::Distance).then_some(sigma);
        self.membership = Some(membership);
        self.filter_policy = Some(policy);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.centers.nrows();
        let n = self.preprocessing.output_dim();
        let bad = |what: String| Err(Error::Config(format!("invalid model: {what}")));
        if h == 0 {
            return bad("no centers".into());
        }
        if self.centers.ncols() != n {
            return bad(format!(
                "centers have {} columns, preprocessing yields {n}",
                self.centers.ncols()
            ));
        }
        if self.center_classes.len() != h {
            return bad(format!(
                "{} center records for {h} centers",
                self.center_classes.len()
            ));
        }
        if self.class_labels.len() != self.class_count {
            return bad(format!(
                "{} class labels for {} classes",
                self.class_labels.len(),
                self.class_count
            ));
        }
        let p = &self.preprocessing;
        if p.means.len() != n || p.stds.len() != n || p.kept.iter().any(|&j| j >= p.input_dim) {
            return bad("inconsistent preprocessing".into());
        }
        if p.stds.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return bad("non-positive feature scale".into());
        }
        if self.centers.iter().any(|v| !v.is_finite()) {
            return bad("non-finite center".into());
        }
        let expected_cols = match self.architecture {
            Architecture::ChipclassExp | Architecture::ChipclassTanh => None,
            Architecture::SsvBinary => Some(1),
            Architecture::SsvMulticlass => Some(self.class_count),
        };
        match (expected_cols, &self.weights) {
            (None, _) => {
                let CenterClasses::Edges(edges) = &self.center_classes else {
                    return bad("chipclass model without edge endpoints".into());
                };
                if edges
                    .iter()
                    .any(|e| e.alpha.len() != n || e.beta.len() != n)
                {
                    return bad("edge endpoint dimension".into());
                }
            }
            (Some(cols), Some(w)) => {
                if w.dim() != (h, cols) {
                    return bad(format!("weights {:?}, expected ({h}, {cols})", w.dim()));
                }
                if w.iter().any(|v| !v.is_finite()) {
                    return bad("non-finite weight".into());
                }
            }
            (Some(_), None) => {
                return Err(Error::Unsupported {
                    architecture: self.architecture.to_string(),
                    what: "prediction without output weights".into(),
                })
            }
        }
        if self.architecture.is_binary() && self.class_count != 2 {
            return bad(format!("{} needs two classes", self.architecture));
        }
        Ok(())
    }

    /// Hidden activations for a standardized query.
    pub fn hidden(&self, z: &[f64]) -> Result<ActivationVector> {
        match self.architecture {
            Architecture::ChipclassExp => chip_activation(z, self.centers.view()),
            _ => tanh_activation(z, self.centers.view()),
        }
    }

    /// Pre-sigmoid score (binary) or logits (multiclass) for a
    /// standardized query.
    pub fn decision_scores(&self, z: &[f64]) -> Result<Vec<f64>> {
        let h = self.hidden(z)?.values;
        match (self.architecture, &self.weights, &self.center_classes) {
            (
                Architecture::ChipclassExp | Architecture::ChipclassTanh,
                _,
                CenterClasses::Edges(edges),
            ) => Ok(vec![edges
                .iter()
                .zip(&h)
                .map(|(e, hk)| chip_edge_weight(z, e) * hk)
                .sum()]),
            (Architecture::SsvBinary | Architecture::SsvMulticlass, Some(w), _) => Ok(w
                .columns()
                .into_iter()
                .map(|col| col.iter().zip(&h).map(|(a, b)| a * b).sum())
                .collect()),
            _ => Err(Error::Unsupported {
                architecture: self.architecture.to_string(),
                what: "prediction with this model layout".into(),
            }),
        }
    }

    /// Class probabilities for a raw query, indexed by class id.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.preprocessing.transform_row(x)?;
        let mut scores = self.decision_scores(&z)?;
        if self.architecture == Architecture::SsvMulticlass {
            softmax_in_place(&mut scores);
            Ok(scores)
        } else {
            let p = stable_sigmoid(scores[0]);
            Ok(vec![1.0 - p, p])
        }
    }

    /// Row-wise [`TrainedModel::predict_proba`].
    pub fn predict_proba_batch(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let rows: Vec<Vec<f64>> = (0..x.nrows())
            .into_par_iter()
            .map(|i| self.predict_proba(&x.row(i).to_vec()))
            .collect::<Result<_>>()?;
        let c = self.class_count;
        Ok(Array2::from_shape_fn((rows.len(), c), |(i, j)| rows[i][j]))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        let model = TrainedModel::try_from(doc)?;
        model.validate()?;
        Ok(model)
    }
}

/// On-disk layout of a [`TrainedModel`].
#[derive(Serialize, Deserialize)]
struct ModelDocument {
    architecture: Architecture,
    centers: Vec<Vec<f64>>,
    center_classes: CenterClasses,
    weights: Option<Vec<Vec<f64>>>,
    preprocessing: Standardizer,
    class_labels: Vec<String>,
    feature_names: Vec<String>,
    sigma_used: Option<f64>,
    membership: Option<MembershipKind>,
    filter_policy: Option<FilterPolicy>,
}

fn rows_of(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

fn matrix_of(rows: Vec<Vec<f64>>, what: &str) -> Result<Array2<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Config(format!("ragged {what} matrix")));
    }
    let n = rows.len();
    Array2::from_shape_vec((n, cols), rows.into_iter().flatten().collect())
        .map_err(|e| Error::Config(format!("{what}: {e}")))
}

impl From<&TrainedModel> for ModelDocument {
    fn from(m: &TrainedModel) -> Self {
        ModelDocument {
            architecture: m.architecture,
            centers: rows_of(&m.centers),
            center_classes: m.center_classes.clone(),
            weights: m.weights.as_ref().map(rows_of),
            preprocessing: m.preprocessing.clone(),
            class_labels: m.class_labels.clone(),
            feature_names: m.feature_names.clone(),
            sigma_used: m.sigma_used,
            membership: m.membership,
            filter_policy: m.filter_policy.clone(),
        }
    }
}

impl TryFrom<ModelDocument> for TrainedModel {
    type Error = Error;

    fn try_from(d: ModelDocument) -> Result<Self> {
        Ok(TrainedModel {
            architecture: d.architecture,
            centers: matrix_of(d.centers, "centers")?,
            center_classes: d.center_classes,
            weights: d.weights.map(|w| matrix_of(w, "weights")).transpose()?,
            preprocessing: d.preprocessing,
            class_count: d.class_labels.len(),
            class_labels: d.class_labels,
            feature_names: d.feature_names,
            sigma_used: d.sigma_used,
            membership: d.membership,
            filter_policy: d.filter_policy,
        })
    }
}

/// Free-function form of [`TrainedModel::predict_proba`].
pub fn predict_proba(model: &TrainedModel, x: &[f64]) -> Result<Vec<f64>> {
    model.predict_proba(x)
}
