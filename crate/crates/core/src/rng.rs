//! Deterministic RNG streams.
//!
//! Every Monte-Carlo sample draws from its own ChaCha stream whose seed is a
//! hash of the master seed and a path of tags (stream kind, grid point,
//! epoch, sample index). Results therefore do not depend on how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream kinds. Kept stable: changing a value changes every result.
pub mod kind {
    pub const TRAIN: u64 = 1;
    pub const TEST: u64 = 2;
    pub const PILOT: u64 = 3;
    pub const SELFTEST: u64 = 4;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// RNG for the stream identified by `master` and `path`.
pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    let mut state = splitmix64(master);
    for &tag in path {
        state = splitmix64(state ^ splitmix64(tag.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    let mut seed = [0u8; 32];
    for (i, chunk) in seed.chunks_exact_mut(8).enumerate() {
        state = splitmix64(state.wrapping_add(i as u64));
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
