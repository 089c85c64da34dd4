//! Seeded random number generation shared by initialization, augmentation and synthesis.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeldRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeldRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream from a base seed and a stream index
/// (splitmix64 finalizer), so per-item generators do not depend on iteration order.
pub fn derive(seed: u64, stream: u64) -> SeldRng {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}
