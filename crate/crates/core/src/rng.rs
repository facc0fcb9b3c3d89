//! Counter-based random streams.
//!
//! Every random draw in the crate comes from [`stream`]: a ChaCha8 generator keyed
//! by `(seed, domain)` whose 64-bit ChaCha stream id is the substream index (one
//! per sensing vector, noise entry, Monte Carlo batch or trial). Draws are therefore
//! independent of evaluation order and can be generated in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent purposes a seed is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Sensing = 1,
    SensingResample = 2,
    Noise = 3,
    Signal = 4,
    TestMatrix = 5,
    MonteCarlo = 6,
    Rank2 = 7,
    PowerIteration = 8,
    Trial = 9,
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a path of indices.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(seed), |acc, &p| mix(acc ^ mix(p)))
}
