//! Seed derivation for independent, order-free parallel work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mixes a master seed and a work-item index into an independent seed
/// (SplitMix64 finalizer). Work item `i` gets the same stream no matter which
/// thread runs it or in what order.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
