//! The single PRNG used for all derived randomness. Instance files and
//! reports carry only seeds, so changing this is a format break: bump
//! [`PRNG_ID`] if you do.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const PRNG_ID: &str = "chacha8/seed_from_u64/v1";

/// Independent substreams derived from one seed.
#[derive(Clone, Copy, Debug)]
#[repr(u64)]
pub enum Purpose {
    Coloring = 1,
    Stream = 2,
    Coverage = 3,
    Matroid = 4,
}

pub fn rng_for(seed: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}
