//! Per-example seed derivation.
//!
//! Every example gets its own RNG stream so datasets can be produced in
//! parallel and still be bitwise reproducible. The per-example seed is
//!
//! ```text
//! mix(base, id) = splitmix64(base ^ splitmix64(id ^ 0x9E37_79B9_7F4A_7C15))
//! ```
//!
//! where `splitmix64` is the finalizer of Steele, Lea and Flood's SplitMix64
//! generator. The result seeds a ChaCha8 stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random source used throughout the crate.
pub type Rng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub const fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub const fn mix(base_seed: u64, example_id: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(example_id ^ GOLDEN_GAMMA))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
