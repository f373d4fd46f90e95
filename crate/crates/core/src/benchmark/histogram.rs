use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{LangPair, TestSet};
use crate::error::{Error, Result};
use crate::numeric;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramViewKind {
    /// Every translation score.
    All,
    /// Scores of the system with the highest mean score in each language pair.
    TopModelPerLanguage,
    /// Per source text and language pair, the best score across systems.
    TopTranslationPerSource,
}

impl HistogramViewKind {
    pub const ALL: [HistogramViewKind; 3] = [
        HistogramViewKind::All,
        HistogramViewKind::TopModelPerLanguage,
        HistogramViewKind::TopTranslationPerSource,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            HistogramViewKind::All => "all",
            HistogramViewKind::TopModelPerLanguage => "top_model",
            HistogramViewKind::TopTranslationPerSource => "top_translation",
        }
    }
}

/// Half-open bin `(lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramView {
    pub view: HistogramViewKind,
    pub bin_width: f64,
    pub anchor: f64,
    /// Bins from the top (`(anchor - width, anchor]`) downwards, contiguous.
    pub bins: Vec<Bin>,
    pub total: usize,
}

fn view_scores(testset: &TestSet, pair: Option<&LangPair>, view: HistogramViewKind) -> Result<Vec<f64>> {
    let pairs: Vec<&LangPair> = testset
        .language_pairs()
        .filter(|p| pair.is_none_or(|q| *p == q))
        .collect();
    let mut scores = Vec::new();
    for p in pairs {
        let mut cells: Vec<(&str, &str, f64)> = Vec::new();
        for t in testset.translations_for(p) {
            let s = t.human_score.ok_or_else(|| {
                Error::MissingHumanScore(format!("({}, {}, {})", t.segment_id, t.target_lang, t.system_id))
            })?;
            cells.push((&t.segment_id, &t.system_id, s));
        }
        match view {
            HistogramViewKind::All => scores.extend(cells.iter().map(|c| c.2)),
            HistogramViewKind::TopModelPerLanguage => {
                let mut by_system: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
                for (_, sys, s) in &cells {
                    by_system.entry(sys).or_default().push(*s);
                }
                let best = by_system
                    .iter()
                    .map(|(sys, v)| (*sys, numeric::mean(v.iter().copied()).expect("non-empty")))
                    .fold(None::<(&str, f64)>, |acc, (sys, m)| match acc {
                        Some((_, best)) if best >= m => acc,
                        _ => Some((sys, m)),
                    });
                if let Some((sys, _)) = best {
                    scores.extend(by_system[sys].iter().copied());
                }
            }
            HistogramViewKind::TopTranslationPerSource => {
                let mut best: BTreeMap<&str, f64> = BTreeMap::new();
                for (seg, _, s) in &cells {
                    best.entry(seg).and_modify(|b| *b = b.max(*s)).or_insert(*s);
                }
                scores.extend(best.into_values());
            }
        }
    }
    Ok(scores)
}

/// Histogram of human scores with bins anchored at `anchor` (the scale
/// maximum, e.g. 100 for ESA or 0 for MQM) and extending downwards.
pub fn score_histogram(
    testset: &TestSet,
    pair: Option<&LangPair>,
    view: HistogramViewKind,
    bin_width: f64,
    anchor: f64,
) -> Result<HistogramView> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidInput(format!("bin width must be positive, got {bin_width}")));
    }
    let scores = view_scores(testset, pair, view)?;
    if let Some(s) = scores.iter().find(|s| **s > anchor) {
        return Err(Error::InvalidInput(format!("score {s} above histogram anchor {anchor}")));
    }
    let index = |s: f64| ((anchor - s) / bin_width).floor() as usize;
    let n_bins = scores.iter().map(|&s| index(s) + 1).max().unwrap_or(0);
    let mut bins: Vec<Bin> = (0..n_bins)
        .map(|k| Bin {
            lower: anchor - (k + 1) as f64 * bin_width,
            upper: anchor - k as f64 * bin_width,
            count: 0,
        })
        .collect();
    for s in &scores {
        bins[index(*s)].count += 1;
    }
    Ok(HistogramView {
        view,
        bin_width,
        anchor,
        bins,
        total: scores.len(),
    })
}
