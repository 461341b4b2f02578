//! Seeded random streams.
//!
//! Every consumer of randomness gets its own ChaCha8 stream, identified by a
//! 64-bit stream id on top of a 64-bit seed. Results therefore depend only on
//! `(seed, stream id)`, never on which worker thread drew the numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Purpose of a per-trial stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    Matrix = 0,
    Message = 1,
    Noise = 2,
}

const TAGS_PER_TRIAL: u64 = 4;

/// Stream for one purpose within one trial: id `4·trial + tag`.
pub fn trial_rng(master_seed: u64, trial: u64, tag: StreamTag) -> ChaCha8Rng {
    stream_rng(master_seed, trial * TAGS_PER_TRIAL + tag as u64)
}

/// A 64-bit seed drawn from a trial stream, for constructors that take a seed.
pub fn trial_seed(master_seed: u64, trial: u64, tag: StreamTag) -> u64 {
    use rand::Rng;
    trial_rng(master_seed, trial, tag).random()
}
