//! Deterministic derivation of independent random streams from one master
//! seed. Every consumer (each party, channel, analyzer, attacker, codec)
//! hashes the master seed with its own label, so adding or removing a
//! consumer never perturbs the draws of the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// An RNG whose stream depends only on `(master_seed, label)`.
pub fn derive_rng(master_seed: u64, label: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// A sub-seed for a child run (e.g. one trial inside an experiment), suitable
/// for use as that run's own master seed.
pub fn derive_seed(master_seed: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}
