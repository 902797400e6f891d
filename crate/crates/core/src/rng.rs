//! Seed splitting for reproducible parallel runs.
//!
//! Every random draw in a trial comes from a ChaCha8 stream keyed by the
//! master seed. The 64-bit stream id is `trial * STREAMS_PER_TRIAL + purpose`,
//! so a trial's randomness never depends on which worker executes it or in
//! which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAMS_PER_TRIAL: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Network = 0,
    Channel = 1,
    Policy = 2,
    Noise = 3,
}

pub fn stream(master_seed: u64, trial: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial * STREAMS_PER_TRIAL + purpose as u64);
    rng
}
