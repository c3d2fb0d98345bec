//! Reproducible per-path random streams.
//!
//! Every path (or draw) owns an independent ChaCha8 stream whose key is the
//! base seed mixed with a stream tag and the path index, so batch results do
//! not depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PathRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `base`, a stream tag and an index into a 64-bit seed.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ stream.rotate_left(17)) ^ index)
}

/// The random stream for path `index` of stream `stream` under `base`.
pub fn path_rng(base: u64, stream: u64, index: u64) -> PathRng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, stream, index))
}

/// Stream tags used across the crate.
pub mod streams {
    pub const SMSP: u64 = 1;
    pub const SGPP: u64 = 2;
    pub const GENERATOR: u64 = 3;
    pub const JOINT: u64 = 4;
    pub const EMPIRICAL: u64 = 5;
}
