//! Seeded, platform-independent randomness.
//!
//! Every randomized routine draws from ChaCha20 keyed by the run seed; trial
//! `i` reads from stream `i`, so trials are independent of each other and of
//! the order in which worker threads pick them up.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type TrialRng = ChaCha20Rng;

/// The generator for trial `stream` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> TrialRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
