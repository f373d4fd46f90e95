use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kendall::{kendall_tau_b, TauResult};
use crate::corpus::{LangPair, TestSet};
use crate::error::{Error, Result};
use crate::estimators::DifficultyEstimate;
use crate::numeric;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// One cell per `(language pair, system)`, correlating across segments.
    #[default]
    BySystem,
    /// One cell per `(language pair, segment)`, correlating across systems.
    ByItem,
}

/// What to do with cells whose τ_b is undefined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipPolicy {
    /// Leave the cell out of its language mean.
    #[default]
    Skip,
    /// Count the cell as τ_b = 0.
    Zero,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "items")]
pub enum SkipReason {
    /// Fewer than two items with both a gold score and an estimate.
    TooFewItems(usize),
    /// One of the two rankings is constant.
    Tied,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedCell {
    pub pair: LangPair,
    /// System id (by-system grouping) or segment id (by-item grouping).
    pub group: String,
    pub reason: SkipReason,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellResult {
    pub pair: LangPair,
    pub group: String,
    pub tau: Option<TauResult>,
    /// Items dropped because the estimate had no score for them.
    pub missing_estimates: usize,
}

impl CellResult {
    pub fn value(&self) -> Option<f64> {
        self.tau.and_then(|t| t.value)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub estimator: String,
    pub grouping: Grouping,
    pub skip_policy: SkipPolicy,
    /// Cells in `(language pair, group)` order.
    pub cells: Vec<CellResult>,
    pub per_language: BTreeMap<LangPair, Option<f64>>,
    pub dec: Option<f64>,
    pub skipped: Vec<SkippedCell>,
    pub missing_estimates: usize,
}

impl CorrelationReport {
    pub fn cell(&self, pair: &LangPair, group: &str) -> Option<&CellResult> {
        self.cells.iter().find(|c| &c.pair == pair && c.group == group)
    }
}

/// Gold scores of one correlation cell. `segments[i]` is the test set
/// position of the segment that item `i` belongs to.
#[derive(Clone, Debug)]
pub(crate) struct GoldCell {
    pub pair: LangPair,
    pub group: String,
    pub segments: Vec<usize>,
    pub systems: Vec<String>,
    pub gold: Vec<f64>,
}

pub(crate) fn gold_cells(testset: &TestSet, grouping: Grouping) -> Result<Vec<GoldCell>> {
    let mut cells: BTreeMap<(LangPair, String), GoldCell> = BTreeMap::new();
    for pair in testset.language_pairs() {
        for t in testset.translations_for(pair) {
            let score = t.human_score.ok_or_else(|| {
                Error::MissingHumanScore(format!("({}, {}, {})", t.segment_id, t.target_lang, t.system_id))
            })?;
            let group = match grouping {
                Grouping::BySystem => t.system_id.clone(),
                Grouping::ByItem => t.segment_id.clone(),
            };
            let cell = cells.entry((pair.clone(), group.clone())).or_insert_with(|| GoldCell {
                pair: pair.clone(),
                group,
                segments: Vec::new(),
                systems: Vec::new(),
                gold: Vec::new(),
            });
            cell.segments.push(testset.segment_position(&t.segment_id).expect("validated"));
            cell.systems.push(t.system_id.clone());
            cell.gold.push(score);
        }
    }
    Ok(cells.into_values().collect())
}

/// Estimate values aligned with a gold cell's items.
pub(crate) fn hyp_for(cell: &GoldCell, estimate: &DifficultyEstimate, testset: &TestSet) -> Vec<Option<f64>> {
    let segments = testset.segments();
    cell.segments
        .iter()
        .zip(&cell.systems)
        .map(|(&s, sys)| estimate.lookup(&segments[s].segment_id, Some(&cell.pair.target), Some(sys)))
        .collect()
}

/// τ_b over the items where both sides are present.
pub(crate) fn cell_tau(gold: &[f64], hyp: &[Option<f64>]) -> (std::result::Result<TauResult, SkipReason>, usize) {
    let mut g = Vec::with_capacity(gold.len());
    let mut h = Vec::with_capacity(gold.len());
    for (gv, hv) in gold.iter().zip(hyp) {
        if let Some(hv) = hv {
            g.push(*gv);
            h.push(*hv);
        }
    }
    let missing = gold.len() - g.len();
    if g.len() < 2 {
        return (Err(SkipReason::TooFewItems(g.len())), missing);
    }
    let tau = kendall_tau_b(&h, &g).expect("finite, equal-length inputs");
    (Ok(tau), missing)
}

/// Average cell values per language, then across languages.
pub(crate) fn aggregate<'a>(
    cells: impl IntoIterator<Item = (&'a LangPair, Option<f64>)>,
    policy: SkipPolicy,
) -> (BTreeMap<LangPair, Option<f64>>, Option<f64>) {
    let mut by_lang: BTreeMap<LangPair, Vec<f64>> = BTreeMap::new();
    for (pair, value) in cells {
        let values = by_lang.entry(pair.clone()).or_default();
        match (value, policy) {
            (Some(v), _) => values.push(v),
            (None, SkipPolicy::Zero) => values.push(0.0),
            (None, SkipPolicy::Skip) => {}
        }
    }
    let per_language: BTreeMap<LangPair, Option<f64>> = by_lang
        .into_iter()
        .map(|(pair, values)| (pair, numeric::mean(values)))
        .collect();
    let dec = numeric::mean(per_language.values().flatten().copied());
    (per_language, dec)
}

/// Difficulty Estimation Correlation of an estimate against the gold scores.
///
/// With [`Grouping::BySystem`] this is the mean over language pairs of the
/// mean over that pair's systems of τ_b between estimated and human scores
/// across segments. Fails when no cell has a defined τ_b.
pub fn dec(
    estimate: &DifficultyEstimate,
    testset: &TestSet,
    grouping: Grouping,
    skip_policy: SkipPolicy,
) -> Result<CorrelationReport> {
    let gold = gold_cells(testset, grouping)?;
    let computed: Vec<(CellResult, Option<SkippedCell>)> = gold
        .par_iter()
        .map(|cell| {
            let hyp = hyp_for(cell, estimate, testset);
            let (tau, missing) = cell_tau(&cell.gold, &hyp);
            let skip_reason = match &tau {
                Err(reason) => Some(reason.clone()),
                Ok(t) if t.value.is_none() => Some(SkipReason::Tied),
                Ok(_) => None,
            };
            let result = CellResult {
                pair: cell.pair.clone(),
                group: cell.group.clone(),
                tau: tau.ok(),
                missing_estimates: missing,
            };
            let skipped = skip_reason.map(|reason| SkippedCell {
                pair: cell.pair.clone(),
                group: cell.group.clone(),
                reason,
            });
            (result, skipped)
        })
        .collect();
    let (cells, skipped): (Vec<CellResult>, Vec<Option<SkippedCell>>) = computed.into_iter().unzip();
    let skipped: Vec<SkippedCell> = skipped.into_iter().flatten().collect();
    if cells.iter().all(|c| c.value().is_none()) {
        return Err(Error::NoDefinedCells { skipped });
    }
    let (per_language, dec) = aggregate(cells.iter().map(|c| (&c.pair, c.value())), skip_policy);
    let missing_estimates = cells.iter().map(|c| c.missing_estimates).sum();
    Ok(CorrelationReport {
        estimator: estimate.name.clone(),
        grouping,
        skip_policy,
        cells,
        per_language,
        dec,
        skipped,
        missing_estimates,
    })
}
