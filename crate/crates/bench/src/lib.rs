//! Shared fixtures for the criterion benchmarks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dense matrix with entries uniform in [-1, 1).
pub fn random_matrix(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
}

/// Random matrix with a positive-definite symmetric part.
pub fn random_monotone_matrix(n: usize, seed: u64) -> DMatrix<f64> {
    let r = random_matrix(n, seed);
    &r.transpose() * &r + DMatrix::identity(n, n) * 0.5
}

/// Random right-hand side with entries uniform in [-1, 1).
pub fn random_vector(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
}
