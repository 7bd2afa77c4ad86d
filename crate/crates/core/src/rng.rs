//! Deterministic seed derivation.
//!
//! Every randomized routine draws from a ChaCha stream derived from the run
//! seed plus a textual scope (method id, dataset id, fold name, ...). Results
//! therefore never depend on thread scheduling or evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(state, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

/// Mixes a base seed with a scope path into a new seed.
pub fn derive_seed(base: u64, scope: &[&str]) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &base.to_le_bytes());
    for part in scope {
        h = fnv1a(h, part.as_bytes());
        // Separator guards against ambiguous concatenations.
        h = fnv1a(h, &[0xff]);
    }
    h
}

/// A seeded generator for the given scope.
pub fn rng_for(base: u64, scope: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, scope))
}
