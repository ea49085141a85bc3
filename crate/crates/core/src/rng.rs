//! Seeded random streams.
//!
//! All randomness comes from ChaCha8 seeded with a 64-bit seed. Independent
//! consumers sharing a seed draw from distinct ChaCha streams, so a dataset,
//! its generating network and its fold assignment never share draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub const STREAM_EXACT: u64 = 1;
pub const STREAM_GIBBS: u64 = 2;
pub const STREAM_NETWORK: u64 = 3;
pub const STREAM_MIRT: u64 = 4;
pub const STREAM_FOLDS: u64 = 5;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
