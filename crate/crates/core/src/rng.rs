//! Seeded randomness.
//!
//! Everything random in the crate is drawn from SplitMix64 used in counter
//! mode: the `i`-th output of the stream keyed by `seed` is
//! `mix64(seed + (i + 1) * GOLDEN)`. Because any output can be computed from
//! `(seed, i)` alone, matrix entries and exponential-mechanism scores can be
//! generated per index, and sequential streams are the same function read in
//! order. Gaussians use the ziggurat sampler from `rand_distr` on top of this
//! stream.

use rand_core::{impls, RngCore};
use rand_distr::{Distribution, StandardNormal};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Output number `counter` of the stream keyed by `seed`.
#[inline]
pub fn counter_u64(seed: u64, counter: u64) -> u64 {
    mix64(seed.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Uniform in the open interval (0, 1), 53 bits.
#[inline]
pub fn unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Child seed for sub-task `tag` of `seed`. Stable across versions.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(mix64(seed ^ 0x6a09_e667_f3bc_c908).wrapping_add(mix64(tag.wrapping_add(GOLDEN))))
}

/// Folds a byte string into a seed (used for canonicalized parameter keys).
pub fn hash_bytes(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = mix64(seed ^ 0xcbf2_9ce4_8422_2325);
    for chunk in bytes.chunks(8) {
        let mut buf = [0u8; 8];
        buf[..chunk.len()].copy_from_slice(chunk);
        h = mix64(h ^ u64::from_le_bytes(buf)).wrapping_add(GOLDEN);
    }
    mix64(h ^ bytes.len() as u64)
}

/// Sequential SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    seed: u64,
    counter: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> u64 {
        let v = counter_u64(self.seed, self.counter);
        self.counter = self.counter.wrapping_add(1);
        v
    }

    /// Uniform in (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        unit_open(self.next())
    }

    /// Uniform index in `0..n` (multiply-shift; bias below `n / 2^64`).
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        ((self.next() as u128 * n as u128) >> 64) as usize
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = StandardNormal.sample(self);
        }
    }

    /// Uniformly distributed point on the unit sphere in `out.len()` dimensions.
    pub fn unit_vector(&mut self, out: &mut [f64]) {
        loop {
            self.fill_normal(out);
            let norm = crate::linalg::norm(out);
            if norm > 1e-300 {
                out.iter_mut().for_each(|v| *v /= norm);
                return;
            }
        }
    }
}

impl RngCore for SplitMix64 {
    fn next_u32(&mut self) -> u32 {
        (self.next() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.next()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}
