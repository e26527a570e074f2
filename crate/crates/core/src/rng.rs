//! Seeded random streams. Every stochastic step in the crate draws from a
//! `RandomStream` derived from an explicit integer seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type RandomStream = ChaCha8Rng;

pub fn stream(seed: u64) -> RandomStream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A stream for a named sub-task of a seeded job, so that stages consuming
/// different amounts of randomness stay independent of one another.
pub fn substream(seed: u64, salt: u64) -> RandomStream {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, salt))
}

/// A seed for a sub-task, decorrelated from `seed + k` for small `k`.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform choice; `None` on an empty slice.
pub fn pick<'a, T>(rng: &mut RandomStream, items: &'a [T]) -> Option<&'a T> {
    items.choose(rng)
}

pub fn index(rng: &mut RandomStream, len: usize) -> usize {
    rng.gen_range(0..len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut r1 = stream(9);
        let mut r2 = stream(9);
        let a: Vec<u32> = (0..4).map(|_| r1.gen()).collect();
        let b: Vec<u32> = (0..4).map(|_| r2.gen()).collect();
        assert_eq!(a, b);
        let x: u64 = substream(9, 1).gen();
        let y: u64 = substream(9, 2).gen();
        assert_ne!(x, y);
    }
}
