//! Counter-based random streams.
//!
//! Every replicate owns the ChaCha stream `(master_seed, replicate)`; a
//! resampled attempt of the same replicate jumps to a disjoint block of that
//! stream. Results therefore depend only on the indices, never on which
//! worker ran the job.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Words reserved for one attempt before the next attempt's block starts.
const ATTEMPT_STRIDE: u128 = 1 << 64;

pub fn substream(master_seed: u64, replicate: u64, attempt: u32) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate);
    rng.set_word_pos(u128::from(attempt) * ATTEMPT_STRIDE);
    rng
}
