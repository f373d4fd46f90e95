//! Difficulty estimators.
//!
//! Every estimator produces a [`DifficultyEstimate`] in quality-like
//! orientation: lower values mark source texts expected to be harder.
//! Source-only estimators key their scores as `(segment, *, *)`, so the same
//! value answers every `(language, system)` query for a segment.

mod baseline;
mod crowd;
mod heuristics;
pub mod oracle;
mod spec;

use std::io::Write;

pub use baseline::{constant_estimator, random_estimator, random_score};
pub use crowd::{crowd_aggregate, CrowdMode};
pub use heuristics::{
    estimate_syntactic_complexity, estimate_text_length, estimate_word_rarity, syntactic_complexity_estimate,
    text_length_estimate, word_rarity_estimate, HeightAggregation,
};
pub use spec::{run_estimator, EstimatorKind, EstimatorSpec, Resources};

use crate::corpus::{Orientation, ScoreMap, ScoreTable};

#[derive(Clone, Debug, PartialEq)]
pub struct DifficultyEstimate {
    pub name: String,
    pub scores: ScoreMap,
    /// Human-readable notes about coverage gaps, produced while estimating.
    pub diagnostics: Vec<String>,
}

impl DifficultyEstimate {
    pub fn new(name: impl Into<String>, scores: ScoreMap) -> Self {
        DifficultyEstimate {
            name: name.into(),
            scores,
            diagnostics: Vec::new(),
        }
    }

    pub fn lookup(&self, segment_id: &str, target_lang: Option<&str>, system_id: Option<&str>) -> Option<f64> {
        self.scores.lookup(segment_id, target_lang, system_id)
    }

    /// Scores transformed as `scale * s + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> DifficultyEstimate {
        DifficultyEstimate {
            name: self.name.clone(),
            scores: self.scores.map_values(|s| scale * s + shift),
            diagnostics: self.diagnostics.clone(),
        }
    }

    pub fn to_score_table(&self) -> ScoreTable {
        ScoreTable {
            name: self.name.clone(),
            orientation: Orientation::QualityLike,
            scores: self.scores.clone(),
        }
    }

    pub fn write_tsv<W: Write>(&self, w: W) -> std::io::Result<()> {
        self.scores.write_tsv(w)
    }
}

/// Bring a score table into quality-like orientation.
pub fn canonicalize(table: &ScoreTable) -> DifficultyEstimate {
    let scores = match table.orientation {
        Orientation::QualityLike => table.scores.clone(),
        Orientation::DifficultyLike => table.scores.map_values(|s| -s),
    };
    DifficultyEstimate::new(table.name.clone(), scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{read_scores, ScoreKey};

    #[test]
    fn difficulty_like_is_negated() {
        let t = read_scores("a\t*\t*\t5\nb\t*\t*\t1\n".as_bytes(), "x", Orientation::DifficultyLike, "m").unwrap();
        let e = canonicalize(&t);
        assert_eq!(e.lookup("a", None, None), Some(-5.0));
        assert_eq!(e.lookup("b", None, None), Some(-1.0));
    }

    #[test]
    fn quality_like_is_identity() {
        let t = read_scores("a\tde\tS\t0.25\n".as_bytes(), "x", Orientation::QualityLike, "m").unwrap();
        assert_eq!(canonicalize(&t).scores, t.scores);
    }

    #[test]
    fn empty_table_gives_empty_estimate() {
        let t = ScoreTable {
            name: "e".into(),
            orientation: Orientation::DifficultyLike,
            scores: ScoreMap::new(),
        };
        assert!(canonicalize(&t).scores.is_empty());
    }

    #[test]
    fn affine_transform_keeps_keys() {
        let scores = ScoreMap::from_entries([(ScoreKey::source("a"), 2.0)]);
        let e = DifficultyEstimate::new("e", scores.unwrap()).affine(3.0, 1.0);
        assert_eq!(e.lookup("a", Some("de"), None), Some(7.0));
    }
}
