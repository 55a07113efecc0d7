//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator. A run is identified by one 64-bit
//! master seed; each consumer (population init, mutation factors, partner
//! draws, crossover, data splits) reads its own ChaCha stream id under that
//! seed, so adding draws to one purpose never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream ids under a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Mutation = 2,
    Partners = 3,
    Crossover = 4,
    Split = 5,
}

pub fn stream(seed: u64, purpose: Purpose) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}

/// SplitMix64 finalizer, used to derive child seeds (per repetition, per
/// node) from a parent seed without correlation between neighbours.
pub fn derive_seed(parent: u64, salt: u64) -> u64 {
    let mut z = parent ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
