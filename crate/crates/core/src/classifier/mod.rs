//! Graph-derived networks: edge-centered Chipclass and the SSV-centered
//! binary and multiclass variants.

mod activation;
mod chipclass;
mod model;
mod ssv;

pub use crate::numeric::softmax;
pub use activation::{
    chip_activation, chip_activation_derivative, chip_activation_derivative_at, tanh_activation,
    tanh_activation_raw, ActivationVector,
};
pub use chipclass::{chip_edge_weight, chipclass_predict, fit_chipclass};
pub use model::{predict_proba, Architecture, CenterClasses, EdgeEndpoints, TrainedModel};
pub use ssv::{
    activation_matrix, cross_entropy, fit_multiclass, fit_ssv_binary, GradientInit,
    GradientOptions, TrainingMode, TrainingReport,
};
