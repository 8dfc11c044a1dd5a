//! Seeded random streams.
//!
//! Every random choice in the crate is drawn from a ChaCha8 stream keyed by a
//! 64-bit seed and a stream index. Work that may run in parallel (trees of a
//! forest, Monte Carlo trials, sweep repeats) takes its own stream keyed by
//! its index, so results never depend on scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream 0 of `seed`.
pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An independent stream of `seed`, selected by `index`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a child seed from `(seed, index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    stream(seed, index).next_u64()
}
