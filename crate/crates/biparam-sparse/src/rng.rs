//! Deterministic pseudo-random numbers.
//!
//! Everything random in this crate flows through SplitMix64 so that any
//! trial can be replayed bit-for-bit from its seed, on any platform. The
//! generator state advances by the golden-ratio increment and each output
//! is the standard finalizer of the advanced state.

/// SplitMix64 stream. The n-th output of a stream seeded with `s` is a pure
/// function of `(s, n)`.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        finalize(self.state)
    }

    /// Fair bit: the top bit of the next output.
    pub fn next_bit(&mut self) -> u64 {
        self.next_u64() >> 63
    }

    /// Uniform in [0, 1): top 53 bits of the next output.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// ±1 with equal probability.
    pub fn next_sign(&mut self) -> f64 {
        if self.next_bit() == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// Uniform integer in [0, bound).
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        // Multiply-shift; bias is < 2^-32 for our bounds and irrelevant here
        // since we only need determinism, not statistical perfection.
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}

/// Stateless deterministic hash of a word sequence to one u64, used for
/// order-independent randomness such as per-rectangle signs.
pub fn hash_words(seed: u64, words: &[u64]) -> u64 {
    let mut acc = finalize(seed.wrapping_add(GOLDEN));
    for &w in words {
        acc = finalize(acc ^ w.wrapping_mul(GOLDEN).wrapping_add(0x1234_5678_9abc_def1));
    }
    acc
}

/// ±1 derived from `hash_words`.
pub fn sign_hash(seed: u64, words: &[u64]) -> f64 {
    if hash_words(seed, words) >> 63 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Per-trial seed derived from a master seed, stable under parallel scheduling.
pub fn trial_seed(master: u64, trial_index: u64) -> u64 {
    hash_words(master, &[trial_index])
}
