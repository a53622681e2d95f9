//! Order-independent seed derivation.
//!
//! Every job (trial, fold, grid arm, repeat) owns a seed computed from the
//! master seed and a textual label, so results do not depend on the order in
//! which jobs run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a child seed from `master` and a label such as `"trial/s-A-0.125-3"`.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(master: u64, label: &str) -> ChaCha8Rng {
    rng_from_seed(derive_seed(master, label))
}
