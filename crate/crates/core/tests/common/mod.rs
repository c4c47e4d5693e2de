#![allow(dead_code)]

use evoquant_core::{MixedStrategy, PayoffMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pd() -> PayoffMatrix {
    PayoffMatrix::from_rows(&[vec![3.0, 0.0], vec![5.0, 1.0]]).unwrap()
}

pub fn hawk_dove() -> PayoffMatrix {
    PayoffMatrix::from_rows(&[vec![-1.0, 2.0], vec![0.0, 1.0]]).unwrap()
}

pub fn rps() -> PayoffMatrix {
    PayoffMatrix::from_rows(&[vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]]).unwrap()
}

pub fn ms(w: &[f64]) -> MixedStrategy {
    MixedStrategy::new(w.to_vec()).unwrap()
}

pub fn random_game(rng: &mut ChaCha8Rng, n: usize, bound: f64) -> PayoffMatrix {
    let data: Vec<f64> = (0..n * n).map(|_| rng.random_range(-bound..bound)).collect();
    PayoffMatrix::from_row_major(n, &data).unwrap()
}

/// Uniform point of the simplex (normalized exponentials).
pub fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> MixedStrategy {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    MixedStrategy::from_clamped(&e.iter().map(|v| v / s).collect::<Vec<_>>(), 1e-12).unwrap()
}

/// Interior start with every share at least `floor`.
pub fn random_interior(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> MixedStrategy {
    let u = random_simplex(rng, n);
    let w: Vec<f64> = u.weights().iter().map(|v| floor + (1.0 - n as f64 * floor) * v).collect();
    MixedStrategy::from_clamped(&w, 1e-12).unwrap()
}
