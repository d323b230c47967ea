//! Splittable seeding.
//!
//! Every stochastic component receives its own seed derived from a master seed
//! and a stable label, so no global RNG state exists and parallel fan-out stays
//! reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed number `index` of `seed`.
pub fn split(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_mul(GOLDEN).wrapping_add(1)))
}

/// Child seed for a named stream (stage name, ligand id, ...).
pub fn derive(seed: u64, label: &str) -> u64 {
    // FNV-1a keeps labels stable across platforms and releases.
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01B3);
    }
    splitmix64(seed ^ splitmix64(h))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
