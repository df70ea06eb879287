//! Seeded random streams.
//!
//! A single root seed fans out into independent ChaCha streams indexed by a
//! counter, so stream `k` never depends on how many draws streams `0..k`
//! consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere randomness is drawn.
pub type SimRng = ChaCha8Rng;

/// Generator for `stream` under `root_seed`.
pub fn stream_rng(root_seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(stream);
    rng
}

/// Stream ids reserved for the individual components of a run.
pub mod streams {
    pub const DESIGN_CHECK: u64 = 1;
    pub const TRAJECTORY_BASE: u64 = 1 << 32;
    pub const FIDELITY_BASE: u64 = 2 << 32;
    pub const CHANNEL: u64 = 4;
    pub const ENSEMBLE: u64 = 5;
}
