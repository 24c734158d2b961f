//! Counter-based random streams.
//!
//! Every random draw is addressed by `(master seed, stream, draw index)`.
//! The generator is ChaCha20 (as implemented by `rand_chacha`):
//!
//! * the 256-bit key is the master seed in little-endian order in bytes
//!   0..8, with the remaining 24 bytes zero;
//! * the 64-bit ChaCha stream id is the round index for per-round draws, or
//!   one of the reserved ids below for post-processing;
//! * the draw index is the ChaCha word position, starting at 0.
//!
//! Because each round reads only its own stream, rounds can be simulated in
//! any order or in parallel and still produce identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Stream used to choose which sifted positions are disclosed.
pub const DISCLOSURE_STREAM: u64 = 1 << 63;
/// Stream used to draw the privacy-amplification Toeplitz matrix.
pub const AMPLIFICATION_STREAM: u64 = (1 << 63) + 1;
/// Stream used to sample random attack parameters in sweeps and tests.
pub const ATTACK_SAMPLING_STREAM: u64 = (1 << 63) + 2;

/// Deterministic stream keyed by a master seed and a stream id.
#[derive(Debug, Clone)]
pub struct Stream {
    inner: ChaCha20Rng,
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Stream for the round with the given index.
    pub fn for_round(seed: u64, round_index: u64) -> Self {
        Self::new(seed, round_index)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Fair coin.
    pub fn coin(&mut self) -> bool {
        self.uniform() < 0.5
    }

    pub fn bit(&mut self) -> u8 {
        u8::from(self.coin())
    }

    /// Current draw index (ChaCha word position).
    pub fn position(&self) -> u128 {
        self.inner.get_word_pos()
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.inner
    }
}
