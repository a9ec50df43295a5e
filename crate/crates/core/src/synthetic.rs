//! Seeded Gaussian blob data for tests, benchmarks and the equivalence check.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::rng::stage_rng;

/// `n` points in `dim` dimensions split evenly over `centers` isotropic
/// blobs with unit variance; centres are uniform in [-box, box]^dim.
/// Labels are the blob index.
pub fn gaussian_blobs(n: usize, dim: usize, centers: usize, half_box: f64, seed: u64) -> Result<(DataMatrix, Vec<usize>)> {
    if n == 0 || dim == 0 || centers == 0 {
        return Err(Error::Config("blob sizes must be positive".into()));
    }
    let mut rng = stage_rng(seed, "blobs");
    let mu: Vec<Vec<f64>> = (0..centers)
        .map(|_| (0..dim).map(|_| rng.random_range(-half_box..=half_box)).collect())
        .collect();
    let mut values = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % centers;
        for &m in &mu[c] {
            let e: f64 = StandardNormal.sample(&mut rng);
            values.push(m + e);
        }
        labels.push(c);
    }
    Ok((DataMatrix::new(n, dim, values)?, labels))
}
