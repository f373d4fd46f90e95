use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DifficultyEstimate;
use crate::corpus::{Orientation, ScoreKey, ScoreMap, ScoreTable};
use crate::error::{Error, Result};
use crate::numeric;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrowdMode {
    /// One score per `(segment, language)`: mean over crowd systems.
    #[default]
    PerLanguage,
    /// One score per segment: mean over crowd systems and languages.
    Pooled,
}

/// Average reference-free quality scores of crowd translations.
///
/// Each table holds one crowd system's scores; every language-keyed entry is
/// one observation. Cells with fewer observations than the best-covered cell
/// are averaged over what is available and noted in the diagnostics.
pub fn crowd_aggregate(name: &str, tables: &[ScoreTable], mode: CrowdMode) -> Result<DifficultyEstimate> {
    let mut cells: BTreeMap<(String, Option<String>), Vec<f64>> = BTreeMap::new();
    for table in tables {
        if table.orientation != Orientation::QualityLike {
            return Err(Error::InvalidInput(format!(
                "crowd table `{}` must be quality_like",
                table.name
            )));
        }
        for (key, value) in table.scores.iter() {
            let Some(lang) = key.target_lang else {
                return Err(Error::InvalidInput(format!(
                    "crowd table `{}` has language-free key {}",
                    table.name,
                    ScoreKey::source(key.segment_id)
                )));
            };
            let cell = match mode {
                CrowdMode::PerLanguage => (key.segment_id, Some(lang)),
                CrowdMode::Pooled => (key.segment_id, None),
            };
            cells.entry(cell).or_default().push(value);
        }
    }
    let full = cells.values().map(Vec::len).max().unwrap_or(0);
    let mut scores = ScoreMap::new();
    let mut diagnostics = Vec::new();
    for ((segment_id, lang), values) in cells {
        if values.len() < full {
            diagnostics.push(format!(
                "{name}: segment `{segment_id}`{} averaged over {} of {full} crowd scores",
                lang.as_deref().map(|l| format!(" ({l})")).unwrap_or_default(),
                values.len()
            ));
        }
        let key = ScoreKey {
            segment_id,
            target_lang: lang,
            system_id: None,
        };
        let mean = numeric::mean(values.iter().copied()).expect("non-empty cell");
        scores.insert(key, mean).map_err(Error::InvalidInput)?;
    }
    for d in &diagnostics {
        log::warn!("{d}");
    }
    Ok(DifficultyEstimate {
        name: name.to_string(),
        scores,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::read_scores;

    fn table(name: &str, rows: &str) -> ScoreTable {
        read_scores(rows.as_bytes(), name, Orientation::QualityLike, name).unwrap()
    }

    #[test]
    fn per_language_mean() {
        let a = table("a", "s1\ten-de\t*\t80\n");
        let b = table("b", "s1\ten-de\t*\t90\n");
        let e = crowd_aggregate("crowd", &[a, b], CrowdMode::PerLanguage).unwrap();
        assert_eq!(e.lookup("s1", Some("en-de"), Some("X")), Some(85.0));
        assert_eq!(e.lookup("s1", None, None), None);
    }

    #[test]
    fn pooled_mean() {
        let a = table("a", "s1\tde\t*\t80\ns1\tja\t*\t70\n");
        let b = table("b", "s1\tde\t*\t90\ns1\tja\t*\t60\n");
        let e = crowd_aggregate("crowd", &[a, b], CrowdMode::Pooled).unwrap();
        assert_eq!(e.lookup("s1", Some("cs"), Some("X")), Some(75.0));
        assert!(e.diagnostics.is_empty());
    }

    #[test]
    fn pooled_with_missing_value_warns() {
        let a = table("a", "s1\tde\t*\t80\ns1\tja\t*\t70\ns2\tde\t*\t10\ns2\tja\t*\t10\n");
        let b = table("b", "s1\tde\t*\t90\ns2\tde\t*\t10\ns2\tja\t*\t10\n");
        let e = crowd_aggregate("crowd", &[a, b], CrowdMode::Pooled).unwrap();
        assert_eq!(e.lookup("s1", None, None), Some(80.0));
        assert_eq!(e.diagnostics.len(), 1);
        assert!(e.diagnostics[0].contains("3 of 4"));
    }

    #[test]
    fn difficulty_like_tables_rejected() {
        let mut a = table("a", "s1\tde\t*\t80\n");
        a.orientation = Orientation::DifficultyLike;
        assert!(crowd_aggregate("c", &[a], CrowdMode::Pooled).is_err());
    }

    #[test]
    fn system_keyed_rows_are_observations() {
        let a = table("a", "s1\tde\tnllb\t80\ns1\tde\tgemma\t60\n");
        let e = crowd_aggregate("c", &[a], CrowdMode::PerLanguage).unwrap();
        assert_eq!(e.lookup("s1", Some("de"), None), Some(70.0));
    }
}
