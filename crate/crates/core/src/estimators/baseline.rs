use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DifficultyEstimate;
use crate::corpus::{ScoreKey, ScoreMap, TestSet};

/// Uniform `[0, 1)` score for a segment, a pure function of `(seed, segment_id)`.
///
/// Keying on the id rather than on iteration order keeps streaming and
/// in-memory runs consistent.
pub fn random_score(seed: u64, segment_id: &str) -> f64 {
    // FNV-1a, then splitmix64 to mix in the seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in segment_id.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = h ^ seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z).gen::<f64>()
}

pub fn random_estimator(testset: &TestSet, seed: u64) -> DifficultyEstimate {
    let scores = ScoreMap::from_entries(
        testset
            .segments()
            .iter()
            .map(|s| (ScoreKey::source(&s.segment_id), random_score(seed, &s.segment_id))),
    )
    .expect("unique segment ids");
    DifficultyEstimate::new("random", scores)
}

pub fn constant_estimator(testset: &TestSet, value: f64) -> DifficultyEstimate {
    let scores = ScoreMap::from_entries(testset.segments().iter().map(|s| (ScoreKey::source(&s.segment_id), value)))
        .expect("unique segment ids");
    DifficultyEstimate::new("constant", scores)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_is_deterministic_and_seed_dependent() {
        let a: Vec<f64> = (0..100).map(|i| random_score(7, &format!("s{i}"))).collect();
        let b: Vec<f64> = (0..100).map(|i| random_score(7, &format!("s{i}"))).collect();
        let c: Vec<f64> = (0..100).map(|i| random_score(8, &format!("s{i}"))).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn random_is_roughly_uniform() {
        let mean = (0..10_000).map(|i| random_score(1, &i.to_string())).sum::<f64>() / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02, "{mean}");
    }
}
