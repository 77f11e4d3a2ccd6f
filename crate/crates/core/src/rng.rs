//! Seed derivation.
//!
//! Every random stream is a ChaCha8 generator keyed by a master seed plus a
//! path of indices (module tag, realization, ...). Streams for different
//! paths are independent, so work units can run in any order or on any
//! thread and still see the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream tags. Kept stable: changing one changes every derived stream.
pub mod tag {
    pub const LAYOUT: u64 = 1;
    pub const ABS_POSITION: u64 = 2;
    pub const CHANNEL: u64 = 3;
    pub const VALIDATE: u64 = 4;
    pub const FIT_RESTART: u64 = 5;
    pub const SYNTH: u64 = 6;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of indices into a 64-bit substream seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn substream(master: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, path))
}

pub fn from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
