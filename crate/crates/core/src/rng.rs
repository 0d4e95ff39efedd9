//! Seeded random streams.
//!
//! Every algorithm run owns exactly one [`RngStream`]. The generator is
//! ChaCha8 seeded through `SeedableRng::seed_from_u64`, so a stream is fully
//! determined by its 64-bit seed. Child streams for independent sub-runs are
//! obtained with [`RngStream::fork`], which consumes one `u64` from the parent.
//!
//! Draw accounting:
//! - a single Bernoulli pull consumes one `u64` (one `f64` in `[0, 1)`);
//! - a batched pull of `c > 1` samples draws one Binomial variate;
//! - tie-breaks consume draws only when a tie actually occurs.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent child stream.
    pub fn fork(&mut self) -> RngStream {
        let child = self.inner.next_u64();
        RngStream::new(child)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.inner.random_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}
