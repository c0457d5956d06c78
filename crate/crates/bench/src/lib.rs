//! Seeded fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use somtool_core::{fit_normalization, init_weights, Dataset, SomModel, TrainingConfig, TrainingMeta};

/// `n` rows of `dim` uniform values in `[0, 1)`.
pub fn random_dataset(n: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Dataset::from_flat(dim, (0..n * dim).map(|_| rng.random()).collect()).expect("n and dim are positive")
}

/// An untrained map whose normalization is fitted on `data`.
pub fn random_model(side: usize, data: &Dataset, seed: u64) -> SomModel {
    let meta = TrainingMeta {
        config: TrainingConfig::new(side, 1, 0.1).with_seed(seed),
        presentations_completed: 0,
    };
    let weights = init_weights(side, data.dim(), seed).expect("side is positive");
    SomModel::new(weights, fit_normalization(data).expect("non-empty data"), meta).expect("consistent parts")
}
