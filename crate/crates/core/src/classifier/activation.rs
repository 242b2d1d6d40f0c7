use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::graph::squared_distance;
use crate::numeric::softmax_in_place;

/// Hidden-layer response to one query.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationVector {
    pub values: Vec<f64>,
    pub normalized: bool,
}

fn distances(x: &[f64], centers: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    if centers.nrows() == 0 {
        return Err(Error::EmptySupport);
    }
    if centers.ncols() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: centers.ncols(),
            actual: x.len(),
        });
    }
    Ok(centers
        .outer_iter()
        .map(|c| match c.as_slice() {
            Some(c) => squared_distance(x, c).sqrt(),
            None => squared_distance(x, &c.to_vec()).sqrt(),
        })
        .collect())
}

fn normalize_logs(logs: &[f64]) -> Vec<f64> {
    let mut values = logs.to_vec();
    softmax_in_place(&mut values);
    values
}

/// `h_k ∝ exp(m_d² / ‖x − P_k‖)` with `m_d` the largest of those
/// distances, normalized to sum to one.
///
/// Evaluated as a softmax over the exponents so it stays finite as a
/// distance approaches zero. A query exactly on a center puts all the
/// weight there (shared evenly if several centers coincide with it).
pub fn chip_activation(x: &[f64], centers: ArrayView2<'_, f64>) -> Result<ActivationVector> {
    let d = distances(x, centers)?;
    let zeros = d.iter().filter(|&&v| v == 0.0).count();
    let values = if zeros > 0 {
        let share = 1.0 / zeros as f64;
        d.iter()
            .map(|&v| if v == 0.0 { share } else { 0.0 })
            .collect()
    } else {
        let m_d = d.iter().copied().fold(0.0, f64::max);
        let exponents: Vec<f64> = d.iter().map(|&v| m_d * m_d / v).collect();
        normalize_logs(&exponents)
    };
    Ok(ActivationVector {
        values,
        normalized: true,
    })
}

/// `d/dd exp(m_d²/d) = −m_d² exp(m_d²/d) / d²`, `d = ‖x − center‖`.
pub fn chip_activation_derivative(x: &[f64], center: &[f64], m_d: f64) -> Result<f64> {
    if x.len() != center.len() {
        return Err(Error::DimensionMismatch {
            expected: center.len(),
            actual: x.len(),
        });
    }
    let d = squared_distance(x, center).sqrt();
    chip_activation_derivative_at(d, m_d)
}

/// [`chip_activation_derivative`] as a function of the distance itself.
pub fn chip_activation_derivative_at(d: f64, m_d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Numerical(format!(
            "activation derivative undefined at distance {d}"
        )));
    }
    let a = m_d * m_d;
    Ok(-a * (a / d).exp() / (d * d))
}

/// `tanh(−d) + 1 = 2e^{−2d} / (1 + e^{−2d})`, the second form being
/// free of cancellation for large `d`.
fn tanh_unit(d: f64) -> f64 {
    let e = (-2.0 * d).exp();
    2.0 * e / (1.0 + e)
}

fn tanh_unit_ln(d: f64) -> f64 {
    std::f64::consts::LN_2 - 2.0 * d - (-2.0 * d).exp().ln_1p()
}

/// `tanh(−‖x − c_k‖) + 1` per center, unnormalized.
pub fn tanh_activation_raw(x: &[f64], centers: ArrayView2<'_, f64>) -> Result<ActivationVector> {
    let values = distances(x, centers)?.into_iter().map(tanh_unit).collect();
    Ok(ActivationVector {
        values,
        normalized: false,
    })
}

/// [`tanh_activation_raw`] normalized to sum to one, computed from
/// logarithms so distant queries do not underflow to `0/0`.
pub fn tanh_activation(x: &[f64], centers: ArrayView2<'_, f64>) -> Result<ActivationVector> {
    let logs: Vec<f64> = distances(x, centers)?
        .into_iter()
        .map(tanh_unit_ln)
        .collect();
    Ok(ActivationVector {
        values: normalize_logs(&logs),
        normalized: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_and_symmetric_centers() {
        let c = array![[1.0, 1.0]];
        assert_eq!(
            chip_activation(&[0.0, 0.0], c.view()).unwrap().values,
            vec![1.0]
        );
        let c = array![[1.0, 0.0], [-1.0, 0.0]];
        assert_eq!(
            chip_activation(&[0.0, 0.0], c.view()).unwrap().values,
            vec![0.5, 0.5]
        );
        assert_eq!(
            tanh_activation(&[0.0, 0.0], c.view()).unwrap().values,
            vec![0.5, 0.5]
        );
    }

    #[test]
    fn zero_distance_is_one_hot() {
        let c = array![[0.0], [1.0], [3.0]];
        assert_eq!(
            chip_activation(&[1.0], c.view()).unwrap().values,
            vec![0.0, 1.0, 0.0]
        );
    }

    #[test]
    fn raw_tanh_values() {
        let c = array![[0.0], [1.0]];
        let h = tanh_activation_raw(&[0.0], c.view()).unwrap();
        assert_eq!(h.values[0], 1.0);
        assert!((h.values[1] - ((-1f64).tanh() + 1.0)).abs() < 1e-16);
        let far = tanh_activation(&[0.0], array![[400.0], [401.0]].view()).unwrap();
        assert!(far.values.iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn derivative_closed_form() {
        assert!(
            (chip_activation_derivative_at(1.0, 1.0).unwrap() + std::f64::consts::E).abs() < 1e-15
        );
        assert!(chip_activation_derivative(&[0.0], &[0.0], 1.0).is_err());
        let far = chip_activation_derivative_at(1e6, 1.0).unwrap();
        assert!(far < 0.0 && far > -1e-11);
    }
}
