//! Seeded random streams.
//!
//! Every sampler in the crate draws through a [`RandomSource`], so an
//! entire run is a pure function of its seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// A reproducible stream of uniform variates.
///
/// Single-owner: concurrent samplers should each get their own source
/// via [`RandomSource::fork`].
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha20Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent source for sub-stream `stream`, derived from the seed only
    /// (not from the current position of `self`).
    pub fn fork(&self, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(stream.wrapping_add(1));
        Self {
            seed: self.seed,
            rng,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw from the open interval (0, 1).
    ///
    /// Uses the top 53 bits and the midpoint of the resulting cell, so
    /// neither 0 nor 1 can be produced.
    pub fn uniform_open(&mut self) -> f64 {
        let bits = self.rng.next_u64() >> 11;
        (bits as f64 + 0.5) / (1u64 << 53) as f64
    }

    /// Uniform index in `0..n`. `n` must be nonzero.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index() on empty range");
        // Lemire's multiply-shift; the bias for small n is far below anything
        // the statistical tests can resolve.
        ((self.rng.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Bernoulli(p) draw.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform_open() < p
    }
}
