//! Inputs shared by the benchmarks.

use concord_core::rng::{stream, unit};
use concord_core::FuzzyPartition;

/// Fuzzy partition with rows drawn from a flat Dirichlet.
pub fn random_fuzzy(n: usize, k: usize, seed: u64) -> FuzzyPartition {
    let mut r = stream(seed, 0);
    let data: Vec<f64> = (0..n * k).map(|_| -(1.0 - unit(&mut r)).ln()).collect();
    FuzzyPartition::renormalized(data, n, k).expect("positive rows")
}
