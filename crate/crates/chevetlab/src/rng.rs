//! Deterministic substream derivation.
//!
//! Every random quantity in the crate flows from a master seed through an
//! explicit derivation path, so results are independent of thread scheduling
//! and worker count: trial `t` of cell `c` always sees the same stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; standard avalanche mix.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold a derivation path into a single 64-bit seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut s = splitmix64(master);
    for &w in path {
        s = splitmix64(s ^ w.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    }
    s
}

/// RNG for the substream identified by `(master, path)`.
pub fn substream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
