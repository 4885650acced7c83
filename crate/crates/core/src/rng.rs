//! Seeded randomness with a fixed, documented mapping from raw words to draws.
//!
//! The raw generator is ChaCha8 keyed from a 64-bit seed (`seed_from_u64`) and a
//! 64-bit stream id, so independent trials can own disjoint streams of one master
//! seed. Every draw below consumes whole 64-bit words in this order:
//!
//! * [`RandomSource::uniform`]: one word `x`, mapped to `(x >> 11) * 2^-53` in `[0, 1)`.
//! * [`RandomSource::below`]: Lemire's widening multiply; one word, plus one more per
//!   rejection (rejections happen with probability `< n / 2^64`).
//! * [`RandomSource::bernoulli`]: one [`uniform`](RandomSource::uniform) draw `u`,
//!   success iff `u < p`.
//! * [`RandomSource::sign`]: one word, `+1` iff its top bit is set.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
    words: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self::derive(seed, 0)
    }

    /// Source for sub-stream `stream` of a master `seed`. Distinct stream ids give
    /// independent sequences; trial `i` of a concurrent batch uses `derive(seed, i)`.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            rng,
            seed,
            stream,
            words: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 64-bit words consumed so far.
    pub fn words_consumed(&self) -> u64 {
        self.words
    }

    #[inline]
    pub fn next_word(&mut self) -> u64 {
        self.words += 1;
        self.rng.next_u64()
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_word() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let mut m = (self.next_word() as u128) * (n as u128);
        if (m as u64) < n {
            let threshold = n.wrapping_neg() % n;
            while (m as u64) < threshold {
                m = (self.next_word() as u128) * (n as u128);
            }
        }
        (m >> 64) as usize
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    #[inline]
    pub fn sign(&mut self) -> f64 {
        if self.next_word() >> 63 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// In-place Fisher–Yates: for `i` from `len-1` down to `1`, swap `i` with `below(i+1)`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

// Lets `rand_distr` samplers draw from a `RandomSource`; their consumption is
// counted like any other draw.
impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        (self.next_word() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.next_word()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_word().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RandomSource::new(42);
        let mut b = RandomSource::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_word(), b.next_word());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RandomSource::derive(42, 0);
        let mut b = RandomSource::derive(42, 1);
        let xs: Vec<u64> = (0..4).map(|_| a.next_word()).collect();
        let ys: Vec<u64> = (0..4).map(|_| b.next_word()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = RandomSource::new(1);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn below_in_range_and_covers() {
        let mut r = RandomSource::new(3);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            let k = r.below(7);
            seen[k] = true;
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(r.below(1), 0);
    }

    #[test]
    fn word_accounting() {
        let mut r = RandomSource::new(9);
        r.uniform();
        r.bernoulli(0.5);
        r.sign();
        assert_eq!(r.words_consumed(), 3);
    }
}
