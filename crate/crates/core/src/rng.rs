//! Counter-based seeding: task `i` of a run with master seed `s` draws from
//! the ChaCha20 stream `i` keyed by `s`, so results do not depend on the order
//! in which tasks execute.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Rng = ChaCha20Rng;

pub fn master_rng(seed: u64) -> Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn task_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed reported for task `stream`; recreating the generator needs both
/// numbers, this value only identifies the task in output files.
pub fn task_seed_label(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream
}
