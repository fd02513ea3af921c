//! Shared helpers for tests: seeded RNGs and random matrix generators.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{C64, CMat};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn standard_normal(r: &mut impl Rng) -> f64 {
    StandardNormal.sample(r)
}

/// Complex Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn random_ginibre(rows: usize, cols: usize, r: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(standard_normal(r), standard_normal(r))
    })
}

pub fn random_hermitian(n: usize, r: &mut impl Rng) -> CMat {
    random_ginibre(n, n, r).hermitize()
}

pub fn uniform_usize(r: &mut impl Rng, n: usize) -> usize {
    r.random_range(0..n)
}
