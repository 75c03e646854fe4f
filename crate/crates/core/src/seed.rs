//! Deterministic seed derivation.
//!
//! Everything random in this crate flows from explicit `u64` seeds so that
//! runs are reproducible and independent of evaluation order or thread
//! count. `derive_seed` splits one base seed into decorrelated streams
//! (one per shard, per test pattern, per experiment repeat, ...).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mix a base seed with a stream index into a new seed.
///
/// Uses the splitmix64 finalizer, so nearby `(base, stream)` pairs map to
/// unrelated outputs. Pure integer arithmetic: stable across platforms.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The crate's deterministic RNG, seeded from a `u64`.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
