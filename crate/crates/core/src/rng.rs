//! Seeded, splittable randomness.
//!
//! Every stochastic operation takes an explicit seed. Sub-streams are derived
//! from a master seed and an index path, so a sample's randomness depends only
//! on `(master, point, sample)` and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// The generator used throughout: ChaCha20, a counter-based stream cipher.
pub type LabRng = ChaCha20Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and an index path.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &idx| {
        splitmix64(acc ^ splitmix64(idx.wrapping_add(0xA5A5_5A5A)))
    })
}

pub fn rng_from_seed(seed: u64) -> LabRng {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    LabRng::from_seed(key)
}

/// Generator for the sub-stream at `path` below `master`.
pub fn rng_for(master: u64, path: &[u64]) -> LabRng {
    rng_from_seed(derive_seed(master, path))
}
