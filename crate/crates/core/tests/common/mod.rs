#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use trnnm::{DenseMatrix, DenseTensor, ObservationSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> DenseTensor {
    let len: usize = shape.iter().product();
    let data = (0..len).map(|_| StandardNormal.sample(rng)).collect();
    DenseTensor::new(shape.to_vec(), data).unwrap()
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Uniformly random missing entries, at least one kept.
pub fn random_observations(truth: &DenseTensor, missing: f64, seed: u64) -> ObservationSet {
    let mut r = rng(seed);
    let mut mask: Vec<bool> = (0..truth.len()).map(|_| r.random::<f64>() >= missing).collect();
    mask[0] = true;
    ObservationSet::new(truth.clone(), mask).unwrap()
}

/// `tau ||m||_* + 0.5 ||m - z||_F^2` with the nuclear norm supplied.
pub fn prox_objective(nuclear: f64, m: &DenseMatrix, z: &DenseMatrix, tau: f64) -> f64 {
    tau * nuclear + 0.5 * m.distance(z).powi(2)
}
