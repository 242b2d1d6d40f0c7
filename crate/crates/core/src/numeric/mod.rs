//! Shared numerical kernels.

mod functions;
mod lstsq;
mod metrics;

pub use functions::{log_sum_exp, softmax, softmax_in_place, stable_sigmoid};
pub use lstsq::{solve_least_squares, LeastSquaresProblem, DEFAULT_RANK_TOLERANCE};
pub use metrics::{auc_binary, roc_auc_ovo, MetricReport};
