use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    /// Ascending.
    pub train: Vec<usize>,
    /// Ascending.
    pub test: Vec<usize>,
}

/// `k` stratified folds over `labels`.
///
/// Each class is shuffled and dealt round-robin, the dealer position
/// carrying over from one class to the next so fold sizes also differ by
/// at most one.
pub fn stratified_kfold(
    labels: &[usize],
    class_count: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let mut by_class = vec![Vec::new(); class_count];
    for (i, &label) in labels.iter().enumerate() {
        by_class
            .get_mut(label)
            .ok_or(Error::InvalidLabel { label, class_count })?
            .push(i);
    }
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                class,
                size: members.len(),
                folds: k,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; labels.len()];
    let mut dealer = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            fold_of[i] = dealer % k;
            dealer += 1;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train) = (0..labels.len()).partition(|&i| fold_of[i] == f);
            Fold { train, test }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_two_class_split() {
        let labels = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let folds = stratified_kfold(&labels, 2, 5, 3).unwrap();
        for f in &folds {
            let mut classes: Vec<usize> = f.test.iter().map(|&i| labels[i]).collect();
            classes.sort();
            assert_eq!(classes, vec![0, 1]);
            assert_eq!(f.train.len(), 8);
        }
        assert_eq!(folds, stratified_kfold(&labels, 2, 5, 3).unwrap());
    }

    #[test]
    fn small_class_is_rejected() {
        let labels = [0, 0, 0, 0, 0, 1, 1];
        assert!(matches!(
            stratified_kfold(&labels, 2, 5, 0),
            Err(Error::ClassTooSmall {
                class: 1,
                size: 2,
                folds: 5
            })
        ));
    }
}
