//! Seeded randomness with named, independent streams.
//!
//! A stream is identified by `(seed, name)`. The generator is ChaCha8 keyed
//! by the seed with the ChaCha stream id derived from the name, so two
//! purposes sharing a seed never share draws and every `(seed, name)` pair
//! reproduces bit-for-bit on every platform.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream used for data sampling (`i(t)`).
pub const STREAM_DATA: &str = "data";
/// Stream used for the query-point randomisation `s_t`.
pub const STREAM_QUERY: &str = "query";
/// Stream used for the per-example scales `c_i`.
pub const STREAM_SCALES: &str = "scales";

/// FNV-1a, 64-bit. Stable across platforms and releases, unlike `DefaultHasher`.
pub fn stream_id(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream: String,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream: &str) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id(stream));
        Self {
            seed,
            stream: stream.to_owned(),
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> &str {
        &self.stream
    }

    /// A sibling stream with the same seed.
    pub fn fork(&self, stream: &str) -> Self {
        Self::new(self.seed, stream)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits; avoids depending on `rand`'s float sampler internals.
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Bernoulli draw with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_stream_reproduce() {
        let mut a = SeededRng::new(7, STREAM_DATA);
        let mut b = SeededRng::new(7, STREAM_DATA);
        for _ in 0..1000 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
            assert_eq!(a.index(100), b.index(100));
        }
    }

    #[test]
    fn streams_are_distinct() {
        let mut a = SeededRng::new(7, STREAM_DATA);
        let mut b = SeededRng::new(7, STREAM_QUERY);
        let xs: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn stream_ids_are_frozen() {
        // FNV-1a reference values; changing these would silently change every experiment.
        assert_eq!(stream_id(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(stream_id("a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn uniform_stays_in_unit_interval() {
        let mut r = SeededRng::new(1, "t");
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
