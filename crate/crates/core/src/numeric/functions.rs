/// Logistic function, evaluated without overflow for any finite `z`.
#[inline]
pub fn stable_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln Σ exp(v_i)`, shifted by the maximum. `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Softmax with the maximum logit subtracted before exponentiating.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut out = logits.to_vec();
    softmax_in_place(&mut out);
    out
}

pub fn softmax_in_place(values: &mut [f64]) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in values.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in values.iter_mut() {
        *v /= total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_values() {
        assert_eq!(stable_sigmoid(0.0), 0.5);
        assert!((stable_sigmoid(3f64.ln()) - 0.75).abs() < 1e-15);
        let tiny = stable_sigmoid(-1e4);
        assert!(tiny >= 0.0 && tiny.is_finite());
        assert_eq!(stable_sigmoid(1e4), 1.0);
        for z in [-30.0, -1.5, 0.2, 7.0, 600.0] {
            assert!((stable_sigmoid(z) + stable_sigmoid(-z) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_uniform_and_extreme() {
        let p = softmax(&[2.0; 4]);
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
        let p = softmax(&[0.0, 1e4]);
        assert_eq!(p[1], 1.0);
        assert!(p[0] >= 0.0 && p.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn log_sum_exp_is_shift_stable() {
        let v = [1000.0, 1000.0];
        assert!((log_sum_exp(&v) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
