//! Deterministic per-chunk random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples per chunk. Fixed so that results do not depend on thread count.
pub const CHUNK: usize = 1024;

/// Stream `chunk` of the generator keyed by `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

pub fn n_chunks(n: usize) -> usize {
    n.div_ceil(CHUNK)
}
