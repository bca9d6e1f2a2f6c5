//! Seed derivation shared by restarts, replications and grid cells.
//!
//! Restart `s` of a fit seeded with `seed` draws its initial codebook from
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `s`. Replications and
//! other nested jobs derive a child seed with [`derive`], a SplitMix64 step over
//! `master ^ golden * (index + 1)`, so that every job is addressed by a pair
//! `(master, index)` and never by execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn derive(master: u64, index: u64) -> u64 {
    let mut z = master ^ GOLDEN.wrapping_mul(index.wrapping_add(1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for restart `stream` of a fit seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
