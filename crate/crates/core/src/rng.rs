//! Counter-keyed random streams.
//!
//! Every random decision in a run draws from its own stream, addressed by a
//! `(master_seed, stream_id)` pair. Stream ids are hashes of the indices that
//! identify the decision (replication, iteration, candidate, sample, ...),
//! so the values a decision sees never depend on how work is scheduled.
//!
//! The generator is ChaCha8 with the 64-bit stream selector set to the
//! stream id; its output is identical on every platform. Gaussian draws use
//! the Marsaglia polar method on top of it with `libm` for `ln`/`sqrt`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Stream-family tags. The first word of every stream key.
pub mod family {
    pub const INIT: u64 = 0x1;
    pub const VARIATION: u64 = 0x2;
    pub const EVAL: u64 = 0x3;
    pub const REEVAL: u64 = 0x4;
    pub const ORACLE: u64 = 0x5;
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a sequence of words.
pub fn hash_words(words: &[u64]) -> u64 {
    let mut h = GOLDEN;
    for &w in words {
        h = mix64(h.wrapping_add(GOLDEN) ^ mix64(w));
    }
    h
}

/// Address of a stream: master seed plus a hashed key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamSeed {
    pub master: u64,
    pub key: u64,
}

impl StreamSeed {
    pub const fn new(master: u64, key: u64) -> Self {
        Self { master, key }
    }

    /// Root of a run: key 0.
    pub const fn root(master: u64) -> Self {
        Self { master, key: 0 }
    }

    /// Child address obtained by appending `words` to this key.
    pub fn derive(&self, words: &[u64]) -> Self {
        let mut h = self.key;
        for &w in words {
            h = hash_words(&[h, w]);
        }
        Self {
            master: self.master,
            key: h,
        }
    }

    pub fn stream(&self) -> RngStream {
        RngStream::new(self.master, self.key)
    }
}

/// Source of standard normal variates. Implemented by [`RngStream`]; tests
/// substitute fixed sequences.
pub trait GaussianSource {
    fn standard_normal(&mut self) -> f64;
}

/// Deterministic pseudo-random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self { inner, spare: None }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Unbiased index in `0..n` (Lemire's widening-multiply rejection).
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be non-empty");
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as usize;
            }
        }
    }

    /// Bernoulli trial with success probability `p`.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// `N(mean, sigma²)`.
    #[inline]
    pub fn normal(&mut self, mean: f64, sigma: f64) -> f64 {
        mean + sigma * self.standard_normal()
    }
}

impl GaussianSource for RngStream {
    fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = libm::sqrt(-2.0 * libm::log(s) / s);
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn same_address_same_sequence() {
        let mut a = RngStream::new(7, 99);
        let mut b = RngStream::new(7, 99);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let xs: Vec<f64> = (0..100).map(|_| a.standard_normal()).collect();
        let ys: Vec<f64> = (0..100).map(|_| b.standard_normal()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RngStream::new(7, 1);
        let mut b = RngStream::new(7, 2);
        let mut c = RngStream::new(8, 1);
        let x = a.next_u64();
        assert_ne!(x, b.next_u64());
        assert_ne!(x, c.next_u64());
    }

    #[test]
    fn derive_is_order_sensitive() {
        let root = StreamSeed::root(3);
        assert_ne!(root.derive(&[1, 2]), root.derive(&[2, 1]));
        assert_eq!(root.derive(&[1, 2]), root.derive(&[1]).derive(&[2]));
        assert_ne!(root.derive(&[0]), root);
    }

    // Frozen output: guards against silent changes of the generator or the
    // key derivation, which would change every published result.
    #[test]
    fn frozen_first_draw() {
        let mut s = StreamSeed::root(42).derive(&[family::EVAL, 0, 0]).stream();
        let first = s.next_u64();
        // Changing this value silently changes every published result.
        assert_eq!(first, 4553725548866171985);
        let mut again = StreamSeed::root(42).derive(&[family::EVAL, 0, 0]).stream();
        assert_eq!(first, again.next_u64());
    }

    #[test]
    fn uniform_range_and_index_bounds() {
        let mut s = RngStream::new(1, 1);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
            assert!(s.index(7) < 7);
        }
        assert_eq!(s.index(1), 0);
    }

    #[test]
    fn normal_moments() {
        let mut s = RngStream::new(11, 5);
        let n = 200_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let z = s.standard_normal();
            sum += z;
            sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 3.0 / libm::sqrt(n as f64));
        assert!((var - 1.0).abs() < 3.0 * libm::sqrt(2.0 / n as f64));
    }
}
