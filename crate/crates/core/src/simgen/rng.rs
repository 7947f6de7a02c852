use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// ChaCha20 stream seeded with `seed_from_u64`.
///
/// Uniforms take the top 53 bits of a `u64` and sit at the midpoint of
/// their bucket, so they lie strictly inside `(0, 1)`. Gaussians are the
/// standard normal inverse CDF of such a uniform.
pub struct SimRng {
    inner: ChaCha20Rng,
    normal: Normal,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self { inner: ChaCha20Rng::seed_from_u64(seed), normal: Normal::standard() }
    }

    pub fn uniform01(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform01()
    }

    pub fn normal(&mut self) -> f64 {
        let u = self.uniform01();
        self.normal.inverse_cdf(u)
    }
}
