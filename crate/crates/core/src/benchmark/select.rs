use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{avg_score, pct_perfect, PerfectRule};
use crate::corpus::{LangPair, SourceSegment, TestSet};
use crate::error::{Error, Result};
use crate::estimators::DifficultyEstimate;
use crate::numeric;

/// Number of segments to keep, absolute or as a fraction of the pool.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    Count(usize),
    Fraction(f64),
}

impl Budget {
    /// Resolve against a pool size. Fractions round to the nearest integer
    /// with a minimum of 1.
    pub fn resolve(&self, available: usize) -> Result<usize> {
        match *self {
            Budget::Count(0) => Err(Error::InvalidInput("budget must be positive".into())),
            Budget::Count(n) => Ok(n),
            Budget::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                Err(Error::InvalidInput(format!("budget fraction {f} outside (0, 1]")))
            }
            Budget::Fraction(f) => Ok(((available as f64 * f).round() as usize).max(1)),
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Count(n) => write!(f, "{n}"),
            Budget::Fraction(x) => write!(f, "{}%", (x * 1e8).round() / 1e6),
        }
    }
}

impl std::str::FromStr for Budget {
    type Err = String;

    /// `25%` or `0.25` is a fraction, `100` a count.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(pct) = s.strip_suffix('%') {
            let v: f64 = pct.trim().parse().map_err(|e| format!("bad budget `{s}`: {e}"))?;
            return Ok(Budget::Fraction(v / 100.0));
        }
        if let Ok(n) = s.parse::<usize>() {
            return Ok(Budget::Count(n));
        }
        let v: f64 = s.parse().map_err(|e| format!("bad budget `{s}`: {e}"))?;
        Ok(Budget::Fraction(v))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionScope {
    /// One subset of source texts shared by all target languages.
    #[default]
    Src,
    /// An independent subset per language pair.
    PerTargetLang,
}

impl std::fmt::Display for SelectionScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SelectionScope::Src => "src",
            SelectionScope::PerTargetLang => "per_target_lang",
        })
    }
}

impl std::str::FromStr for SelectionScope {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "src" => Ok(SelectionScope::Src),
            "per_target_lang" | "tgt" => Ok(SelectionScope::PerTargetLang),
            _ => Err(format!("unknown selection scope `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectedSegment {
    pub segment_id: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LanguageMetrics {
    pub avg_score: f64,
    pub pct_perfect: f64,
    pub segments: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionResult {
    pub estimator_name: String,
    pub budget: Budget,
    pub scope: SelectionScope,
    /// Source-scope selection, hardest first. Empty for per-language scope.
    pub selected: Vec<SelectedSegment>,
    /// The subset evaluated in each language pair, hardest first.
    pub per_language_selected: BTreeMap<LangPair, Vec<SelectedSegment>>,
    pub per_language_metrics: BTreeMap<LangPair, LanguageMetrics>,
    pub macro_avg_score: f64,
    pub macro_pct_perfect: f64,
    pub warnings: Vec<String>,
}

fn order(a: &SelectedSegment, b: &SelectedSegment) -> Ordering {
    a.score.total_cmp(&b.score).then_with(|| a.segment_id.cmp(&b.segment_id))
}

/// The `k` lowest-scoring candidates by `(score, segment_id)`, sorted.
pub(crate) fn bottom_k(mut candidates: Vec<SelectedSegment>, k: usize) -> Vec<SelectedSegment> {
    if k == 0 {
        return Vec::new();
    }
    if k < candidates.len() {
        candidates.select_nth_unstable_by(k - 1, order);
        candidates.truncate(k);
    }
    candidates.sort_by(order);
    candidates
}

/// Split `total` across pools proportionally to their sizes (largest remainder,
/// ties by pool key).
fn allocate(total: usize, pools: &BTreeMap<String, usize>) -> BTreeMap<String, usize> {
    let size: usize = pools.values().sum();
    if size == 0 {
        return pools.keys().map(|k| (k.clone(), 0)).collect();
    }
    let total = total.min(size);
    let mut out: BTreeMap<String, usize> = BTreeMap::new();
    let mut remainders = Vec::new();
    for (key, &n) in pools {
        let exact = total as f64 * n as f64 / size as f64;
        let base = exact.floor() as usize;
        out.insert(key.clone(), base);
        remainders.push((exact - base as f64, key.clone()));
    }
    let assigned: usize = out.values().sum();
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    for (_, key) in remainders.into_iter().take(total - assigned) {
        *out.get_mut(&key).expect("known pool") += 1;
    }
    out
}

/// Select the `budget` hardest source texts (lowest canonical scores) and
/// evaluate the subset.
///
/// Ties are broken by `segment_id`. With [`SelectionScope::Src`] the
/// estimate must resolve at `(segment, *, *)`; when the test set mixes
/// source languages the budget is split across source-language pools in
/// proportion to their size.
pub fn select_top(
    estimate: &DifficultyEstimate,
    testset: &TestSet,
    budget: Budget,
    scope: SelectionScope,
    rule: &PerfectRule,
) -> Result<SelectionResult> {
    select_filtered(estimate, testset, budget, scope, rule, |_| true)
}

pub(crate) fn select_filtered(
    estimate: &DifficultyEstimate,
    testset: &TestSet,
    budget: Budget,
    scope: SelectionScope,
    rule: &PerfectRule,
    filter: impl Fn(&SourceSegment) -> bool,
) -> Result<SelectionResult> {
    let mut warnings = Vec::new();
    let mut selected = Vec::new();
    let mut per_language_selected = BTreeMap::new();

    match scope {
        SelectionScope::Src => {
            let mut pools: BTreeMap<String, Vec<SelectedSegment>> = BTreeMap::new();
            let mut missing = 0usize;
            for s in testset.segments().iter().filter(|s| filter(s)) {
                match estimate.lookup(&s.segment_id, None, None) {
                    Some(score) => pools.entry(s.source_lang.clone()).or_default().push(SelectedSegment {
                        segment_id: s.segment_id.clone(),
                        score,
                    }),
                    None => missing += 1,
                }
            }
            if missing > 0 {
                warnings.push(format!(
                    "{missing} segments have no source-level estimate and were not candidates"
                ));
            }
            let total: usize = pools.values().map(Vec::len).sum();
            if total == 0 {
                return Err(Error::InvalidInput(format!(
                    "estimate `{}` resolves no candidate segment at source level",
                    estimate.name
                )));
            }
            let b = budget.resolve(total)?;
            if b > total {
                warnings.push(format!("budget {b} exceeds the {total} candidates; selecting all"));
            }
            let sizes = pools.iter().map(|(k, v)| (k.clone(), v.len())).collect();
            let quota = allocate(b, &sizes);
            for (lang, pool) in pools {
                selected.extend(bottom_k(pool, quota[&lang]));
            }
            selected.sort_by(order);
            let chosen: BTreeSet<&str> = selected.iter().map(|s| s.segment_id.as_str()).collect();
            for pair in testset.language_pairs() {
                let subset: Vec<SelectedSegment> = selected
                    .iter()
                    .filter(|s| {
                        testset.segment(&s.segment_id).is_some_and(|seg| seg.source_lang == pair.source)
                            && testset.systems(pair).into_iter().flatten().any(|m| {
                                testset.translation(&s.segment_id, &pair.target, m).is_some()
                            })
                    })
                    .cloned()
                    .collect();
                debug_assert!(subset.iter().all(|s| chosen.contains(s.segment_id.as_str())));
                if !subset.is_empty() {
                    per_language_selected.insert(pair.clone(), subset);
                }
            }
        }
        SelectionScope::PerTargetLang => {
            for pair in testset.language_pairs() {
                let mut seen = BTreeSet::new();
                let mut candidates = Vec::new();
                let mut missing = 0usize;
                for t in testset.translations_for(pair) {
                    if !seen.insert(t.segment_id.as_str()) {
                        continue;
                    }
                    let seg = testset.segment(&t.segment_id).expect("validated");
                    if !filter(seg) {
                        continue;
                    }
                    match estimate.lookup(&t.segment_id, Some(&pair.target), None) {
                        Some(score) => candidates.push(SelectedSegment {
                            segment_id: t.segment_id.clone(),
                            score,
                        }),
                        None => missing += 1,
                    }
                }
                if missing > 0 {
                    warnings.push(format!("{pair}: {missing} segments have no estimate"));
                }
                if candidates.is_empty() {
                    continue;
                }
                let b = budget.resolve(candidates.len())?;
                if b > candidates.len() {
                    warnings.push(format!(
                        "{pair}: budget {b} exceeds the {} candidates; selecting all",
                        candidates.len()
                    ));
                }
                per_language_selected.insert(pair.clone(), bottom_k(candidates, b));
            }
            if per_language_selected.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "estimate `{}` resolves no candidate segment",
                    estimate.name
                )));
            }
        }
    }
    for w in &warnings {
        log::warn!("{}: {w}", estimate.name);
    }

    let metrics: Vec<(LangPair, LanguageMetrics)> = per_language_selected
        .par_iter()
        .map(|(pair, subset)| {
            let ids: Vec<&str> = subset.iter().map(|s| s.segment_id.as_str()).collect();
            Ok((
                pair.clone(),
                LanguageMetrics {
                    avg_score: avg_score(&ids, testset, pair)?,
                    pct_perfect: pct_perfect(&ids, testset, pair, rule)?,
                    segments: ids.len(),
                },
            ))
        })
        .collect::<Result<_>>()?;
    let per_language_metrics: BTreeMap<LangPair, LanguageMetrics> = metrics.into_iter().collect();
    let macro_avg_score = numeric::mean(per_language_metrics.values().map(|m| m.avg_score)).unwrap_or(f64::NAN);
    let macro_pct_perfect = numeric::mean(per_language_metrics.values().map(|m| m.pct_perfect)).unwrap_or(f64::NAN);
    Ok(SelectionResult {
        estimator_name: estimate.name.clone(),
        budget,
        scope,
        selected,
        per_language_selected,
        per_language_metrics,
        macro_avg_score,
        macro_pct_perfect,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub budget: Budget,
    /// Segments selected (summed over language pairs for per-language scope).
    pub selected: usize,
    pub macro_avg_score: f64,
    pub macro_pct_perfect: f64,
}

/// Default sweep grid: 5%, 10%, ..., 100%.
pub fn default_budgets() -> Vec<Budget> {
    (1..=20).map(|i| Budget::Fraction(i as f64 / 20.0)).collect()
}

pub fn budget_sweep(
    estimate: &DifficultyEstimate,
    testset: &TestSet,
    budgets: &[Budget],
    scope: SelectionScope,
    rule: &PerfectRule,
) -> Result<Vec<SweepPoint>> {
    budgets
        .par_iter()
        .map(|&b| {
            let r = select_top(estimate, testset, b, scope, rule)?;
            Ok(SweepPoint {
                budget: b,
                selected: r.per_language_selected.values().map(Vec::len).sum::<usize>().max(r.selected.len()),
                macro_avg_score: r.macro_avg_score,
                macro_pct_perfect: r.macro_pct_perfect,
            })
        })
        .collect()
}

/// Selection run independently inside each domain's segment pool.
pub fn domain_breakdown(
    estimate: &DifficultyEstimate,
    testset: &TestSet,
    budget: Budget,
    scope: SelectionScope,
    rule: &PerfectRule,
) -> Result<BTreeMap<String, SelectionResult>> {
    let domains: Vec<String> = testset.domains().into_iter().map(str::to_string).collect();
    let results: Vec<(String, SelectionResult)> = domains
        .par_iter()
        .map(|d| {
            let r = select_filtered(estimate, testset, budget, scope, rule, |s| &s.domain == d)?;
            Ok((d.clone(), r))
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().collect())
}
