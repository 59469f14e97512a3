//! Counter-based splittable random number streams.
//!
//! Each path draws from a stream derived from `(master_seed, stream_id)`, so
//! results do not depend on execution order or worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// A ChaCha stream keyed by the master seed, with the 64-bit stream id
/// selecting an independent substream.
pub fn stream(master_seed: u64, stream_id: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}
