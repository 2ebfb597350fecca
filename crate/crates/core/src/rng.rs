//! Seeded random streams.
//!
//! Every independent unit of simulation work (a replication, a bootstrap
//! resample) draws from its own ChaCha stream keyed by `(seed, stream id)`,
//! so results do not depend on scheduling or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent stream `stream_id` under `seed`.
pub fn stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Uniform on the open interval (0, 1).
#[inline]
pub fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // 53 random bits centred in their cell, never 0 or 1.
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[inline]
pub fn unit_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -open01(rng).ln()
}
