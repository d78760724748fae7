//! Deterministic per-task random streams.
//!
//! Every random draw is taken from a stream derived from the run seed and a
//! task key, so results do not depend on thread count or evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream purposes.
pub mod purpose {
    pub const INIT: u64 = 1;
    pub const OFFSPRING: u64 = 2;
    pub const BEP: u64 = 3;
    pub const PERTURB: u64 = 4;
    pub const SWEEP: u64 = 5;
}

/// Random stream for task `(purpose, a, b)` under `seed`.
pub fn keyed_rng(seed: u64, purpose: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&purpose.to_le_bytes());
    key[16..24].copy_from_slice(&a.to_le_bytes());
    key[24..].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
