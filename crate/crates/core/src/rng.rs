//! Keyed random streams.
//!
//! Every random quantity in the simulator is drawn from a stream derived from a
//! base seed plus a tuple of integer keys, so that evaluation order never
//! changes a result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with a list of keys into a single 64-bit seed.
pub fn mix_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

pub fn keyed_rng(seed: u64, keys: &[u64]) -> SimRng {
    SimRng::seed_from_u64(mix_seed(seed, keys))
}

/// Stream namespaces, kept distinct so unrelated draws never share a stream.
pub mod stream {
    pub const LAYOUT: u64 = 1;
    pub const SHADOW: u64 = 2;
    pub const PROBE_SHADOW: u64 = 3;
    pub const UE_DROP: u64 = 4;
    pub const POPULATION: u64 = 5;
    pub const UE_MOTION: u64 = 6;
    pub const MOBILITY_SHADOW: u64 = 7;
}
