//! Deterministic random streams.
//!
//! Every stochastic site draws from its own ChaCha stream named after its
//! role, so adding, removing or parallelizing call sites never changes what
//! any other site sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// 64-bit FNV-1a over the raw bytes. Maps stream names to stream ids.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// The rng for site `name` under `seed`. Same (seed, name) in, same draws out.
pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(name.as_bytes()));
    rng
}

/// Stream for the `index`-th member of a family of sites (episodes, seeds).
pub fn indexed_stream(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut tag = Vec::with_capacity(name.len() + 8);
    tag.extend_from_slice(name.as_bytes());
    tag.extend_from_slice(&index.to_le_bytes());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(&tag));
    rng
}
