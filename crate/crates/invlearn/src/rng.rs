//! Seeded randomness with named substreams.
//!
//! A run owns a single 64-bit seed. Components derive independent streams
//! from `(seed, label)` so that adding randomness consumption to one
//! component does not perturb another, and per-trial streams from
//! `(seed, label, trial)` so trials can run in any order (or in parallel)
//! with identical results.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in label.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// The named substream of a run seed.
pub fn substream(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ fnv1a(label)))
}

/// The per-trial substream of a run seed.
pub fn trial_substream(seed: u64, label: &str, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(
        splitmix64(seed ^ fnv1a(label)).wrapping_add(trial.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
    ))
}

/// Draws `len` uniform coin bits.
pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, len: usize) -> BitString {
    BitString::random(rng, len)
}
