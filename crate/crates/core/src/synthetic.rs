//! Seeded synthetic test sets for simulations and tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{LangPair, Protocol, TestSet, TestSetBuilder};

const TARGETS: [&str; 9] = ["cs", "de", "es", "hi", "is", "ja", "ru", "uk", "zh"];
const DOMAINS: [&str; 4] = ["news", "social", "literary", "speech"];
const WORDS: [&str; 24] = [
    "the", "council", "said", "river", "quietly", "we", "cannot", "allow", "this", "to", "happen", "market", "after",
    "storm", "a", "letter", "from", "her", "brother", "arrived", "late", "and", "nobody", "noticed",
];

#[derive(Clone, Debug)]
pub struct SyntheticConfig {
    pub segments: usize,
    pub systems: usize,
    /// Number of `en -> X` language pairs (at most 9).
    pub languages: usize,
    pub seed: u64,
    pub protocol: Protocol,
    /// Weight of a shared per-segment difficulty in every score. With 0 the
    /// scores are i.i.d. across all cells.
    pub latent_weight: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            segments: 100,
            systems: 4,
            languages: 2,
            seed: 0,
            protocol: Protocol::Esa,
            latent_weight: 0.0,
        }
    }
}

/// Build a full grid test set: every segment translated by every system into
/// every language. Segment ids are `seg00000`, `seg00001`, ...
pub fn synthetic_testset(config: &SyntheticConfig) -> TestSet {
    assert!(config.languages <= TARGETS.len(), "at most {} languages", TARGETS.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut b = TestSetBuilder::new();
    let mut latent = Vec::with_capacity(config.segments);
    for s in 0..config.segments {
        let len = rng.gen_range(3..40);
        let text: Vec<&str> = (0..len).map(|_| *WORDS.choose(&mut rng).expect("non-empty")).collect();
        let errors = rng.gen_range(0..4);
        b.add_segment(
            &segment_id(s),
            &format!("doc{}", s / 10),
            "en",
            &format!("{}.", text.join(" ")),
            DOMAINS[s % DOMAINS.len()],
            Some(errors),
        )
        .expect("valid synthetic segment");
        latent.push(rng.gen::<f64>());
    }
    let w = config.latent_weight.clamp(0.0, 1.0);
    for (s, &difficulty) in latent.iter().enumerate() {
        for target in &TARGETS[..config.languages] {
            let pair = LangPair::new("en", *target);
            for m in 0..config.systems {
                let u: f64 = rng.gen();
                let quality = (1.0 - w) * u + w * (1.0 - difficulty);
                let score = match config.protocol {
                    Protocol::Esa => (quality * 100.0).round(),
                    Protocol::Mqm => -((1.0 - quality) * 25.0).round(),
                    Protocol::Other => quality,
                };
                let variant = rng.gen_range(0..3);
                b.add_translation(
                    &segment_id(s),
                    &pair,
                    &format!("sys{m:02}"),
                    &format!("{target} translation {s} v{variant}"),
                    Some(score),
                    Some(config.protocol),
                    false,
                )
                .expect("valid synthetic translation");
            }
        }
    }
    b.build().expect("valid synthetic test set")
}

pub fn segment_id(i: usize) -> String {
    format!("seg{i:05}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape_and_determinism() {
        let cfg = SyntheticConfig {
            segments: 20,
            systems: 3,
            languages: 2,
            seed: 4,
            ..Default::default()
        };
        let a = synthetic_testset(&cfg);
        assert_eq!(a.segments().len(), 20);
        assert_eq!(a.translations().len(), 20 * 3 * 2);
        assert_eq!(a.language_pairs().count(), 2);
        assert_eq!(a, synthetic_testset(&cfg));
        assert!(a.translations().iter().all(|t| (0.0..=100.0).contains(&t.human_score.unwrap())));
    }

    #[test]
    fn mqm_scores_are_non_positive() {
        let ts = synthetic_testset(&SyntheticConfig {
            protocol: Protocol::Mqm,
            segments: 10,
            ..Default::default()
        });
        assert!(ts.translations().iter().all(|t| t.human_score.unwrap() <= 0.0));
    }
}
