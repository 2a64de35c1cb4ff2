//! Deterministic, counter-keyed random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash an ordered key tuple into one seed.
pub fn key_seed(keys: &[u64]) -> u64 {
    keys.iter().fold(0x6a09_e667_f3bc_c908, |h, &k| mix64(h ^ mix64(k)))
}

/// Independent generator for the given key tuple.
pub fn stream(keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(key_seed(keys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(&[1, 2, 3]).gen();
        let b: u64 = stream(&[1, 2, 3]).gen();
        let c: u64 = stream(&[1, 3, 2]).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn pinned_values() {
        // guards against silent changes of the seeding scheme
        assert_eq!(key_seed(&[]), 0x6a09_e667_f3bc_c908);
        assert_eq!(mix64(0), 0xe220_a839_7b1d_cdaf);
    }
}
