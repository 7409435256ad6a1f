//! Deterministic randomness for the whole crate.
//!
//! Everything stochastic in the simulator (fitness table entries, linkage
//! sampling, start states, mutation choices, vote errors) is derived from
//! 64-bit keys through one fixed avalanche mixer, the SplitMix64 finalizer.
//! The mixer and the key-chaining scheme below are part of the on-disk
//! contract: outputs are reproducible bit-for-bit from the seeds alone, with
//! no stored tables and no dependence on an external RNG implementation.
//!
//! Key chaining: `chain(seed, words)` starts from `mix64(seed)` and absorbs
//! each word `w` as `h <- mix64(h ^ (w + GOLDEN))`. Distinct word sequences
//! give independent streams for all practical purposes. The leading word of
//! every chain in this crate is a `STREAM_*` tag so that different purposes
//! (fitness values, local linkage, external linkage, seed derivation, run
//! streams) can never collide.

/// Weyl increment used by SplitMix64 (2^64 / golden ratio, odd).
pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream tags. The numeric values are arbitrary but frozen.
pub mod stream {
    /// Per-gene fitness table entries.
    pub const GENE_VALUE: u64 = 0x01;
    /// Local (intra-species) epistatic input sampling.
    pub const LINKAGE_LOCAL: u64 = 0x02;
    /// External (inter-species) input sampling.
    pub const LINKAGE_EXTERNAL: u64 = 0x03;
    /// Landscape seeds derived from an experiment master seed.
    pub const LANDSCAPE_SEED: u64 = 0x04;
    /// Per-run start seeds derived from an experiment master seed.
    pub const START_SEED: u64 = 0x05;
    /// The per-run stream (start state, gene choices, vote-error rolls).
    pub const RUN: u64 = 0x06;
}

/// SplitMix64 finalizer: a fixed 64-bit avalanche mixer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a subkey from `seed` and a sequence of words.
#[inline]
pub fn chain(seed: u64, words: &[u64]) -> u64 {
    let mut h = mix64(seed);
    for &w in words {
        h = mix64(h ^ w.wrapping_add(GOLDEN));
    }
    h
}

/// Map a mixed 64-bit word to a double in [0, 1) using the top 53 bits.
#[inline]
pub fn unit_f64(h: u64) -> f64 {
    const SCALE: f64 = 1.0 / ((1u64 << 53) as f64);
    (h >> 11) as f64 * SCALE
}

/// Counter-based generator: SplitMix64 keyed by a 64-bit stream key.
///
/// `next_u64` advances a Weyl counter and mixes it, so the stream is a pure
/// function of `(key, call index)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyStream {
    state: u64,
}

impl KeyStream {
    pub fn new(key: u64) -> Self {
        KeyStream { state: key }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform double in [0, 1).
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }

    /// Single uniform bit.
    #[inline]
    pub fn next_bit(&mut self) -> u8 {
        (self.next_u64() >> 63) as u8
    }

    /// Unbiased uniform integer in [0, bound) via Lemire's method.
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        loop {
            let x = self.next_u64();
            let m = (x as u128) * (bound as u128);
            let lo = m as u64;
            if lo < bound {
                let threshold = bound.wrapping_neg() % bound;
                if lo < threshold {
                    continue;
                }
            }
            return (m >> 64) as u64;
        }
    }

    /// Sample `count` distinct indices uniformly from `[0, n)`, optionally
    /// excluding one index. Partial Fisher-Yates over the candidate list;
    /// the returned order is the sampling order.
    pub fn sample_distinct(
        &mut self,
        n: usize,
        count: usize,
        exclude: Option<usize>,
    ) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).filter(|i| Some(*i) != exclude).collect();
        debug_assert!(count <= pool.len());
        for i in 0..count {
            let j = i + self.next_below((pool.len() - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool
    }
}
