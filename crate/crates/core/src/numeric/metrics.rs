//! Ranking metrics: Mann-Whitney AUC and the one-vs-one multiclass
//! ROC-AUC of Hand & Till.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
pub fn auc_binary(scores: &[f64], positive: &[bool]) -> Result<f64> {
    if scores.len() != positive.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            actual: positive.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::UndefinedMetric("NaN score".into()));
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(
            "AUC needs both positive and negative samples".into(),
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // mid-ranks (1-based) summed over positives; rank sums are multiples
    // of 1/2 and stay exact
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let mid_rank = (start + 1 + end) as f64 / 2.0;
        let positives = order[start..end].iter().filter(|&&i| positive[i]).count();
        rank_sum += mid_rank * positives as f64;
        start = end;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Unweighted mean over class pairs `(a, b)` of
/// `(A(a|b) + A(b|a)) / 2`, where `A(a|b)` is the AUC of column `a`
/// separating class `a` from class `b` on the samples of those two classes.
pub fn roc_auc_ovo(probabilities: ArrayView2<'_, f64>, labels: &[usize]) -> Result<f64> {
    let c = probabilities.ncols();
    if probabilities.nrows() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: probabilities.nrows(),
            actual: labels.len(),
        });
    }
    if c < 2 {
        return Err(Error::UndefinedMetric(
            "OvO AUC needs at least two classes".into(),
        ));
    }
    let mut members = vec![Vec::new(); c];
    for (i, &label) in labels.iter().enumerate() {
        members
            .get_mut(label)
            .ok_or(Error::InvalidLabel {
                label,
                class_count: c,
            })?
            .push(i);
    }
    if let Some(class) = members.iter().position(Vec::is_empty) {
        return Err(Error::UndefinedMetric(format!(
            "class {class} absent from evaluation set"
        )));
    }

    let pair_auc = |a: usize, b: usize| -> Result<f64> {
        let rows: Vec<usize> = members[a].iter().chain(&members[b]).copied().collect();
        let is_a: Vec<bool> = rows.iter().map(|&i| labels[i] == a).collect();
        let score_a: Vec<f64> = rows.iter().map(|&i| probabilities[[i, a]]).collect();
        let score_b: Vec<f64> = rows.iter().map(|&i| probabilities[[i, b]]).collect();
        let is_b: Vec<bool> = is_a.iter().map(|&x| !x).collect();
        Ok((auc_binary(&score_a, &is_a)? + auc_binary(&score_b, &is_b)?) / 2.0)
    };

    let mut total = 0.0;
    let mut pairs = 0;
    for a in 0..c {
        for b in a + 1..c {
            total += pair_auc(a, b)?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Per-fold metric values with their mean and sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_fold: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl MetricReport {
    pub fn from_folds(per_fold: Vec<f64>) -> Self {
        let n = per_fold.len() as f64;
        let mean = per_fold.iter().sum::<f64>() / n;
        let std = if per_fold.len() > 1 {
            (per_fold.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MetricReport {
            per_fold,
            mean,
            std,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn separated_and_tied() {
        let labels = [false, false, true, true];
        assert_eq!(auc_binary(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap(), 1.0);
        assert_eq!(auc_binary(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap(), 0.0);
        assert_eq!(auc_binary(&[0.5; 4], &labels).unwrap(), 0.5);
    }

    #[test]
    fn single_class_is_undefined() {
        assert!(matches!(
            auc_binary(&[0.1, 0.2], &[true, true]),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn ovo_two_classes_equals_binary() {
        let p = array![[0.8, 0.2], [0.3, 0.7], [0.6, 0.4], [0.45, 0.55], [0.5, 0.5]];
        let labels = [0, 1, 1, 0, 1];
        let scores: Vec<f64> = p.column(1).to_vec();
        let positive: Vec<bool> = labels.iter().map(|&l| l == 1).collect();
        let binary = auc_binary(&scores, &positive).unwrap();
        assert!((roc_auc_ovo(p.view(), &labels).unwrap() - binary).abs() < 1e-15);
    }

    #[test]
    fn ovo_perfect_and_missing_class() {
        let p = array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(roc_auc_ovo(p.view(), &[0, 1, 2]).unwrap(), 1.0);
        assert!(matches!(
            roc_auc_ovo(p.view(), &[0, 1, 1]),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn report_statistics() {
        let r = MetricReport::from_folds(vec![1.0, 3.0]);
        assert_eq!(r.mean, 2.0);
        assert!((r.std - 2f64.sqrt()).abs() < 1e-15);
    }
}
