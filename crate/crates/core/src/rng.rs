//! Reproducible random numbers for generators and randomized tests.
//!
//! The stream is ChaCha with 8 rounds. The 256-bit key is the little-endian
//! encoding of the 64-bit seed followed by 24 zero bytes; the stream id is
//! the optional split index. Integers in `[0, n)` are drawn by rejection on
//! the top of a 64x64 -> 128 multiply; reals in `[0, 1)` take the high 53
//! bits of one 64-bit word. None of this depends on `rand` sampling code, so
//! any language with a ChaCha8 implementation can reproduce the outputs.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifier written into generated files.
pub const ALGORITHM: &str = "chacha8-le64key-v1";

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Self {
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    /// Independent stream `stream` under the same seed.
    pub fn split(seed: u64, stream: u64) -> Self {
        let mut rng = Self::new(seed);
        rng.inner.set_stream(stream);
        rng
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `[0, n)`. Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        // Lemire's nearly-divisionless rejection.
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }

    /// Uniform real in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Fisher-Yates shuffle, from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }
}
