use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::dec::{cell_tau, gold_cells, hyp_for, Grouping};
use super::kendall::kendall_tau_b;
use crate::corpus::TestSet;
use crate::error::{Error, Result};
use crate::estimators::DifficultyEstimate;
use crate::numeric;

/// Symmetric matrix of mean τ_b between translators' human scores.
///
/// Entry `(a, b)` averages, over the language pairs both translators cover,
/// τ_b between their scores on the segments they share. Entries with no
/// shared language (or only undefined correlations) are `None`; the
/// diagonal is 1.
pub fn agreement_matrix(testset: &TestSet, translators: &[String]) -> Result<Vec<Vec<Option<f64>>>> {
    for t in testset.translations() {
        if t.human_score.is_none() && translators.contains(&t.system_id) {
            return Err(Error::MissingHumanScore(format!(
                "({}, {}, {})",
                t.segment_id, t.target_lang, t.system_id
            )));
        }
    }
    let k = translators.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let values: Vec<Option<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| pairwise(testset, &translators[i], &translators[j]))
        .collect();
    let mut matrix = vec![vec![None; k]; k];
    for (i, row) in matrix.iter_mut().enumerate() {
        row[i] = Some(1.0);
    }
    for (&(i, j), v) in pairs.iter().zip(values) {
        matrix[i][j] = v;
        matrix[j][i] = v;
    }
    Ok(matrix)
}

fn pairwise(testset: &TestSet, a: &str, b: &str) -> Option<f64> {
    let mut per_language = Vec::new();
    for (pair, systems) in testset.systems_per_language() {
        if !(systems.contains(a) && systems.contains(b)) {
            continue;
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for t in testset.translations_for(pair).filter(|t| t.system_id == a) {
            if let Some(other) = testset.translation(&t.segment_id, &pair.target, b) {
                xs.push(t.human_score.expect("checked"));
                ys.push(other.human_score.expect("checked"));
            }
        }
        if xs.len() < 2 {
            continue;
        }
        if let Some(v) = kendall_tau_b(&xs, &ys).expect("valid inputs").value {
            per_language.push(v);
        }
    }
    numeric::mean(per_language)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemAlignment {
    pub mean_tau: f64,
    /// Population standard deviation across language pairs.
    pub std_tau: f64,
    pub language_count: usize,
}

/// Per-system mean and spread of the by-system τ_b across language pairs.
///
/// Only cells with a defined τ_b count; systems with fewer than
/// `min_languages` such language pairs are left out.
pub fn per_system_alignment(
    estimate: &DifficultyEstimate,
    testset: &TestSet,
    min_languages: usize,
) -> Result<BTreeMap<String, SystemAlignment>> {
    let cells = gold_cells(testset, Grouping::BySystem)?;
    let values: Vec<(String, Option<f64>)> = cells
        .par_iter()
        .map(|cell| {
            let hyp = hyp_for(cell, estimate, testset);
            let (tau, _) = cell_tau(&cell.gold, &hyp);
            (cell.group.clone(), tau.ok().and_then(|t| t.value))
        })
        .collect();
    let mut by_system: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (system, value) in values {
        if let Some(v) = value {
            by_system.entry(system).or_default().push(v);
        }
    }
    Ok(by_system
        .into_iter()
        .filter(|(_, taus)| taus.len() >= min_languages.max(1))
        .map(|(system, taus)| {
            let alignment = SystemAlignment {
                mean_tau: numeric::mean(taus.iter().copied()).expect("non-empty"),
                std_tau: numeric::population_std(&taus).expect("non-empty"),
                language_count: taus.len(),
            };
            (system, alignment)
        })
        .collect())
}
