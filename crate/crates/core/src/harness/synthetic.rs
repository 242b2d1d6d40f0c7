use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::Result;

/// `m` points uniform in `[0, 1]^n`, labelled by which side of the plane
/// `Σx = n/2` they fall on.
pub fn uniform_dataset(m: usize, n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((m, n), |_| rng.random::<f64>());
    let labels: Vec<usize> = x
        .outer_iter()
        .map(|row| usize::from(row.sum() > n as f64 / 2.0))
        .collect();
    Dataset::with_class_count(x, labels, 2)
}

/// `per_class` isotropic Gaussian draws around each center; class `c`
/// is the `c`-th center.
pub fn gaussian_blobs(
    centers: &[Vec<f64>],
    per_class: usize,
    std: f64,
    seed: u64,
) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, std).map_err(|e| crate::error::Error::Config(e.to_string()))?;
    let n = centers.first().map_or(0, Vec::len);
    let m = centers.len() * per_class;
    let mut x = Array2::zeros((m, n));
    let mut labels = Vec::with_capacity(m);
    for (c, center) in centers.iter().enumerate() {
        for i in 0..per_class {
            let row = c * per_class + i;
            for (j, &mu) in center.iter().enumerate() {
                x[[row, j]] = mu + noise.sample(&mut rng);
            }
            labels.push(c);
        }
    }
    Dataset::with_class_count(x, labels, centers.len())
}
