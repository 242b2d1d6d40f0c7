//! Fixtures shared by the graph benchmarks.

use ggm_core::Dataset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use ggm_core::harness::uniform_dataset;

/// Sorted random sample of `round(fraction · m)` row indices.
pub fn removal_set(m: usize, fraction: f64, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = (fraction * m as f64).round() as usize;
    let mut removed = rand::seq::index::sample(&mut rng, m, r).into_vec();
    removed.sort_unstable();
    removed
}

/// Rows of `dataset` not listed in the sorted `removed`.
pub fn survivors(dataset: &Dataset, removed: &[usize]) -> Dataset {
    let keep: Vec<usize> = (0..dataset.len())
        .filter(|i| removed.binary_search(i).is_err())
        .collect();
    dataset.subset(&keep)
}
