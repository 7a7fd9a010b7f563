//! Counter-based randomness.
//!
//! Every random quantity in the crate is a pure function of a master seed and
//! a small tuple of integer coordinates (node, step, pair, replicate, ...).
//! That makes results independent of how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a seed together with a sequence of coordinates.
#[inline]
pub fn derive(seed: u64, coords: &[u64]) -> u64 {
    let mut h = mix64(seed ^ GOLDEN);
    for &c in coords {
        h = mix64(h.wrapping_add(GOLDEN) ^ mix64(c.wrapping_add(GOLDEN)));
    }
    h
}

/// Stable 64-bit key for a short string (FNV-1a); used for country and label keys.
pub fn str_key(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seeded stream generator for sequential draws inside one entity.
pub fn stream(seed: u64, coords: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, coords))
}

/// Stream tags so different consumers of one master seed never collide.
pub mod tag {
    pub const SHOCK: u64 = 1;
    pub const DRAW: u64 = 2;
    pub const SURROGATE: u64 = 3;
    pub const SWEEP: u64 = 4;
    pub const COUNTRY: u64 = 5;
    pub const COUPLED: u64 = 6;
    pub const SHAREHOLDING: u64 = 7;
}
