use nalgebra::{DMatrix, SVD};
use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;

/// `design · W ≈ targets` in the least-squares sense.
#[derive(Debug, Clone)]
pub struct LeastSquaresProblem<'a> {
    pub design: ArrayView2<'a, f64>,
    pub targets: ArrayView2<'a, f64>,
    /// Singular values below `rank_tolerance × σ_max` are treated as zero.
    pub rank_tolerance: f64,
}

impl<'a> LeastSquaresProblem<'a> {
    pub fn new(design: ArrayView2<'a, f64>, targets: ArrayView2<'a, f64>) -> Self {
        LeastSquaresProblem {
            design,
            targets,
            rank_tolerance: DEFAULT_RANK_TOLERANCE,
        }
    }
}

fn to_nalgebra(a: ArrayView2<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Minimum-norm least-squares solution `W = H⁺ Y` via a thin SVD.
pub fn solve_least_squares(problem: &LeastSquaresProblem<'_>) -> Result<Array2<f64>> {
    let (h, y) = (problem.design, problem.targets);
    let (m, s) = h.dim();
    if m == 0 || s == 0 || y.ncols() == 0 {
        return Err(Error::Numerical(format!(
            "empty least-squares system ({m}×{s})"
        )));
    }
    if y.nrows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: y.nrows(),
        });
    }
    if h.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "non-finite entry in least-squares system".into(),
        ));
    }
    if !(problem.rank_tolerance >= 0.0) {
        return Err(Error::Numerical(format!(
            "invalid rank tolerance {}",
            problem.rank_tolerance
        )));
    }

    let svd = SVD::try_new(to_nalgebra(h), true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let (u, v_t) = match (&svd.u, &svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => unreachable!("U and Vᵀ were requested"),
    };
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = problem.rank_tolerance * sigma_max;

    let mut projected = u.transpose() * to_nalgebra(y);
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        let scale = if sv > 0.0 && sv >= cutoff {
            1.0 / sv
        } else {
            0.0
        };
        projected.row_mut(i).scale_mut(scale);
    }
    let w = v_t.transpose() * projected;
    Ok(Array2::from_shape_fn((s, y.ncols()), |(i, j)| w[(i, j)]))
}
