//! Paired permutation tests between difficulty estimators and the
//! significance-cluster ranks derived from them.
//!
//! The test statistic is the DEC difference `δ = DEC(a) - DEC(b)` over the
//! cells both estimators cover. Each resample swaps, for every source
//! segment independently with probability 1/2, the two estimators' scores
//! on all of that segment's cells, and recomputes `δ*`. The one-sided
//! p-value is `(1 + #{δ* ≥ δ}) / (1 + resamples)`.
//!
//! Swap decisions for resample `r` come from a ChaCha8 stream selected by
//! `(seed, r)` and consumed in segment order, so results do not depend on
//! how resamples are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::TestSet;
use crate::error::{Error, Result};
use crate::estimators::DifficultyEstimate;
use crate::rank_stats::{aggregate, cell_tau, dec, gold_cells, hyp_for, GoldCell, Grouping, SkipPolicy};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PermConfig {
    pub resamples: usize,
    pub seed: u64,
    pub grouping: Grouping,
    pub skip_policy: SkipPolicy,
}

impl PermConfig {
    pub fn new(resamples: usize, seed: u64) -> Self {
        PermConfig {
            resamples,
            seed,
            grouping: Grouping::BySystem,
            skip_policy: SkipPolicy::Skip,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermTest {
    pub dec_a: f64,
    pub dec_b: f64,
    pub delta: f64,
    /// One-sided p-value for "a is better than b".
    pub p_value: f64,
    /// One-sided p-value for "b is better than a", from the same resamples.
    pub p_value_reverse: f64,
    pub resamples: usize,
}

/// Both estimators' values on the items they share.
struct PairedCell<'a> {
    cell: &'a GoldCell,
    keep: Vec<usize>,
    a: Vec<f64>,
    b: Vec<f64>,
}

fn paired_cells<'a>(
    cells: &'a [GoldCell],
    a: &DifficultyEstimate,
    b: &DifficultyEstimate,
    testset: &TestSet,
) -> Vec<PairedCell<'a>> {
    cells
        .iter()
        .map(|cell| {
            let ha = hyp_for(cell, a, testset);
            let hb = hyp_for(cell, b, testset);
            let mut paired = PairedCell {
                cell,
                keep: Vec::new(),
                a: Vec::new(),
                b: Vec::new(),
            };
            for (i, (x, y)) in ha.into_iter().zip(hb).enumerate() {
                if let (Some(x), Some(y)) = (x, y) {
                    paired.keep.push(i);
                    paired.a.push(x);
                    paired.b.push(y);
                }
            }
            paired.a = average_ranks(&paired.a);
            paired.b = average_ranks(&paired.b);
            paired
        })
        .collect()
}

/// 1-based ranks with ties sharing their mean rank. Swapped values then live
/// on one scale whatever the two estimates' units are.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn dec_of(cells: &[PairedCell<'_>], values: impl Fn(&PairedCell<'_>) -> Vec<f64>, policy: SkipPolicy) -> Option<f64> {
    let taus: Vec<Option<f64>> = cells
        .iter()
        .map(|c| {
            let gold: Vec<f64> = c.keep.iter().map(|&i| c.cell.gold[i]).collect();
            let hyp: Vec<Option<f64>> = values(c).into_iter().map(Some).collect();
            cell_tau(&gold, &hyp).0.ok().and_then(|t| t.value)
        })
        .collect();
    aggregate(cells.iter().zip(taus).map(|(c, v)| (&c.cell.pair, v)), policy).1
}

fn swap_flags(seed: u64, resample: usize, segments: usize) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(resample as u64);
    let mut flags = Vec::with_capacity(segments);
    while flags.len() < segments {
        let word = rng.next_u64();
        let take = (segments - flags.len()).min(64);
        flags.extend((0..take).map(|bit| word >> bit & 1 == 1));
    }
    flags
}

/// PERM-BOTH paired permutation test of `DEC(a) > DEC(b)`.
///
/// Each resample swaps, per source segment, the two estimates' within-cell
/// ranks across all of that segment's cells.
pub fn perm_both_test(
    a: &DifficultyEstimate,
    b: &DifficultyEstimate,
    testset: &TestSet,
    config: &PermConfig,
) -> Result<PermTest> {
    if config.resamples == 0 {
        return Err(Error::InvalidInput("resamples must be at least 1".into()));
    }
    let cells = gold_cells(testset, config.grouping)?;
    let paired = paired_cells(&cells, a, b, testset);
    if paired.iter().all(|c| c.keep.len() < 2) {
        return Err(Error::NoCommonCoverage(a.name.clone(), b.name.clone()));
    }
    let policy = config.skip_policy;
    let dec_a = dec_of(&paired, |c| c.a.clone(), policy);
    let dec_b = dec_of(&paired, |c| c.b.clone(), policy);
    let (Some(dec_a), Some(dec_b)) = (dec_a, dec_b) else {
        let undefined = if dec_a.is_none() { &a.name } else { &b.name };
        return Err(Error::InvalidInput(format!(
            "DEC of `{undefined}` is undefined on the common cells"
        )));
    };
    let delta = dec_a - dec_b;
    let n_segments = testset.segments().len();

    let tallies: Vec<(bool, bool)> = (0..config.resamples)
        .into_par_iter()
        .map(|r| {
            let flags = swap_flags(config.seed, r, n_segments);
            let pick = |c: &PairedCell<'_>, first: bool| -> Vec<f64> {
                c.keep
                    .iter()
                    .enumerate()
                    .map(|(k, &i)| {
                        let swapped = flags[c.cell.segments[i]];
                        if swapped == first {
                            c.b[k]
                        } else {
                            c.a[k]
                        }
                    })
                    .collect()
            };
            let da = dec_of(&paired, |c| pick(c, true), policy);
            let db = dec_of(&paired, |c| pick(c, false), policy);
            match (da, db) {
                (Some(x), Some(y)) => {
                    let d = x - y;
                    (d >= delta, d <= delta)
                }
                // undefined resamples count against both directions
                _ => (true, true),
            }
        })
        .collect();
    let ge = tallies.iter().filter(|t| t.0).count();
    let le = tallies.iter().filter(|t| t.1).count();
    let denom = (config.resamples + 1) as f64;
    Ok(PermTest {
        dec_a,
        dec_b,
        delta,
        p_value: (1 + ge) as f64 / denom,
        p_value_reverse: (1 + le) as f64 / denom,
        resamples: config.resamples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignificanceResult {
    pub names: Vec<String>,
    /// DEC of each estimator on its own full coverage.
    pub dec_values: Vec<f64>,
    /// `p_values[i][j]`: one-sided p-value that estimator `i` beats `j`.
    pub p_values: Vec<Vec<f64>>,
    pub ranks: Vec<usize>,
    pub alpha: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl SignificanceResult {
    /// Indices ordered by DEC, best first (ties by name).
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.names.len()).collect();
        idx.sort_by(|&i, &j| {
            self.dec_values[j]
                .total_cmp(&self.dec_values[i])
                .then_with(|| self.names[i].cmp(&self.names[j]))
        });
        idx
    }
}

/// Test every ordered pair and assign `rank(e) = 1 + #{e' : p(e' beats e) < alpha}`.
pub fn rank_clusters(
    estimates: &[DifficultyEstimate],
    testset: &TestSet,
    alpha: f64,
    config: &PermConfig,
) -> Result<SignificanceResult> {
    if estimates.len() < 2 {
        return Err(Error::InvalidInput("ranking needs at least two estimators".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("alpha {alpha} outside [0, 1]")));
    }
    let dec_values = estimates
        .iter()
        .map(|e| {
            dec(e, testset, config.grouping, config.skip_policy)?
                .dec
                .ok_or_else(|| Error::InvalidInput(format!("DEC of `{}` is undefined", e.name)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let k = estimates.len();
    let mut p_values = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let t = perm_both_test(&estimates[i], &estimates[j], testset, config)?;
            p_values[i][j] = t.p_value;
            p_values[j][i] = t.p_value_reverse;
        }
    }
    let ranks = (0..k)
        .map(|e| 1 + (0..k).filter(|&o| o != e && p_values[o][e] < alpha).count())
        .collect();
    Ok(SignificanceResult {
        names: estimates.iter().map(|e| e.name.clone()).collect(),
        dec_values,
        p_values,
        ranks,
        alpha,
        resamples: config.resamples,
        seed: config.seed,
    })
}
