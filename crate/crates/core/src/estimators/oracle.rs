//! Estimators built from the gold human scores themselves.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DifficultyEstimate;
use crate::corpus::{ScoreKey, ScoreMap, TestSet};
use crate::error::{Error, Result};
use crate::numeric;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleLevel {
    /// The true score of every translation.
    Full,
    /// True scores averaged over the systems of each language.
    SrcLang,
    /// True scores averaged over systems and languages.
    Src,
}

pub fn oracle(testset: &TestSet, level: OracleLevel) -> Result<DifficultyEstimate> {
    let name = match level {
        OracleLevel::Full => "oracle",
        OracleLevel::SrcLang => "oracle-src-lang",
        OracleLevel::Src => "oracle-src",
    };
    let mut cells: BTreeMap<ScoreKey, Vec<f64>> = BTreeMap::new();
    for t in testset.translations() {
        let score = t.human_score.ok_or_else(|| {
            Error::MissingHumanScore(format!("({}, {}, {})", t.segment_id, t.target_lang, t.system_id))
        })?;
        let key = match level {
            OracleLevel::Full => ScoreKey::exact(&t.segment_id, &t.target_lang, &t.system_id),
            OracleLevel::SrcLang => ScoreKey::language(&t.segment_id, &t.target_lang),
            OracleLevel::Src => ScoreKey::source(&t.segment_id),
        };
        cells.entry(key).or_default().push(score);
    }
    let mut scores = ScoreMap::new();
    for (key, values) in cells {
        let mean = numeric::mean(values).expect("non-empty cell");
        scores.insert(key, mean).map_err(Error::InvalidInput)?;
    }
    Ok(DifficultyEstimate::new(name, scores))
}
