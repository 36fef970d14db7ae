//! Seed derivation for reproducible, schedule-independent random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The generator used everywhere in the crate.
pub type StreamRng = ChaCha12Rng;

/// splitmix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `(a, b)` under a master seed.
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    mix64(mix64(mix64(master) ^ a.wrapping_mul(0xD6E8_FEB8_6659_FD93)) ^ b)
}

pub fn stream(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}
