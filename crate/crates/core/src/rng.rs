//! Reproducible random streams.
//!
//! Chains (and test examples) are independent work items; each one draws from
//! its own stream derived from a master seed, so results do not depend on
//! scheduling or worker count. The split function is the SplitMix64 output
//! mix applied to `master + (index + 1) * GAMMA`, i.e. position `index + 1`
//! of the SplitMix64 sequence started at `master`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for substream `index` of the stream identified by `master`.
pub fn substream(master: u64, index: u64) -> u64 {
    mix(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GAMMA)))
}

/// Dedicated generator for one chain of one run.
pub fn chain_rng(master: u64, chain_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream(master, chain_index))
}
