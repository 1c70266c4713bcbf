//! Deterministic seed fan-out.
//!
//! Every random draw in this crate comes from a [`ChaCha12Rng`] seeded through
//! [`derive_seed`], which hashes `(master, index, role)` with SHA-256 and takes
//! the first eight little-endian bytes. Distinct roles and indices give
//! independent streams, trial counts can grow without reshuffling earlier
//! trials, and parallel execution cannot perturb any draw.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Collision-resistant sub-seed for one `(index, role)` slot under a master seed.
pub fn derive_seed(master: u64, index: u64, role: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(index.to_le_bytes());
    hasher.update(role.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("SHA-256 digest is 32 bytes"))
}

/// The one RNG constructor used throughout the crate.
pub fn rng_from(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}
