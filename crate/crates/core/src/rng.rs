//! Per-work-unit random streams.
//!
//! Every parallelisable unit of work (one walk, one sentence, one training
//! shard) owns a ChaCha8 generator whose 64-bit seed is derived from the
//! user seed and the unit's coordinates with the SplitMix64 finalizer
//! (Steele, Lea & Flood 2014):
//!
//! ```text
//! mix(z)   = z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
//!            z ^= z >> 27; z *= 0x94d049bb133111eb; z ^ (z >> 31)
//! seed(base, a, b) = mix(mix(mix(base ^ GAMMA) ^ mix(a + GAMMA)) ^ mix(b + 2*GAMMA))
//! ```
//!
//! with `GAMMA = 0x9e3779b97f4a7c15` and wrapping arithmetic. Streams depend
//! only on the coordinates, never on scheduling, so serial and parallel runs
//! draw identical numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_seed(base: u64, a: u64, b: u64) -> u64 {
    let h = mix64(base ^ GAMMA);
    let h = mix64(h ^ mix64(a.wrapping_add(GAMMA)));
    mix64(h ^ mix64(b.wrapping_add(GAMMA.wrapping_mul(2))))
}

pub fn stream(base: u64, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(base, a, b))
}
