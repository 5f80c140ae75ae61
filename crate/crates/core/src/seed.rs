//! Counter-based seed derivation.
//!
//! One master seed feeds every random stream. A stream is named by a path of
//! integers (scenario fingerprint, trial index, cluster side, ...) and its seed
//! is `derive_seed(master, path)`: each component is whitened with the
//! splitmix64 finaliser and folded into the running state. Two streams share a
//! seed only if their paths are equal, and no stream depends on how many
//! others were drawn before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &id| splitmix64(acc ^ splitmix64(id)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream ids for the two ends of a link.
pub const TX_STREAM: u64 = 0x5458;
pub const RX_STREAM: u64 = 0x5258;
