//! Domain points and their canonical identity.
//!
//! Traces never store raw points; they store a 64-bit FNV-1a hash of a
//! canonical byte encoding, which stays stable across platforms.

use crate::rng::fnv1a64;

pub trait Point: Clone + PartialEq + Eq + std::hash::Hash + std::fmt::Debug + Send + Sync {
    /// Canonical byte encoding used for hashing.
    fn canonical_bytes(&self) -> Vec<u8>;

    /// Human-readable form for enumeration dumps.
    fn label(&self) -> String;

    fn hash64(&self) -> u64 {
        fnv1a64(&self.canonical_bytes())
    }
}

/// Arm index in a finite bandit: encoded as a big-endian 64-bit integer.
impl Point for usize {
    fn canonical_bytes(&self) -> Vec<u8> {
        (*self as u64).to_be_bytes().to_vec()
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

/// Token sequence: encoded as its raw token bytes.
impl Point for Vec<u8> {
    fn canonical_bytes(&self) -> Vec<u8> {
        self.clone()
    }

    fn label(&self) -> String {
        self.iter().map(|t| t.to_string()).collect::<String>()
    }
}
