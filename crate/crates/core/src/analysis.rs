//! Pitfall analyses: how estimates correlate with source length, source
//! errors, output diversity and the share of unique outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{EmbeddingTable, LangPair, TestSet};
use crate::error::Result;
use crate::estimators::DifficultyEstimate;
use crate::numeric;
use crate::rank_stats::pearson;
use crate::text_metrics::{symmetric_chrf, ChrfConfig};
use crate::tokenize::Tokenizer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    SourceLength,
    SourceErrorsPerWord,
    DiversityEmbedding,
    DiversityChrf,
    UniqueOutputs,
}

impl Variable {
    pub const ALL: [Variable; 5] = [
        Variable::SourceLength,
        Variable::SourceErrorsPerWord,
        Variable::DiversityEmbedding,
        Variable::DiversityChrf,
        Variable::UniqueOutputs,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variable::SourceLength => "source_length",
            Variable::SourceErrorsPerWord => "source_errors_per_word",
            Variable::DiversityEmbedding => "diversity_embedding",
            Variable::DiversityChrf => "diversity_chrf",
            Variable::UniqueOutputs => "unique_outputs",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Output-side variables of one segment within one language pair.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LanguageVariables {
    /// `None` with fewer than two translations or no embedding table.
    pub diversity_embedding: Option<f64>,
    pub diversity_chrf: Option<f64>,
    pub unique_outputs: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SourceVariables {
    pub segment_id: String,
    pub length: usize,
    pub errors_per_word: Option<f64>,
    /// Means of the per-language values over the languages that define them.
    pub diversity_embedding: Option<f64>,
    pub diversity_chrf: Option<f64>,
    pub unique_outputs: Option<f64>,
    pub per_language: BTreeMap<LangPair, LanguageVariables>,
}

impl SourceVariables {
    /// Segment-level value of `var`.
    pub fn get(&self, var: Variable) -> Option<f64> {
        match var {
            Variable::SourceLength => Some(self.length as f64),
            Variable::SourceErrorsPerWord => self.errors_per_word,
            Variable::DiversityEmbedding => self.diversity_embedding,
            Variable::DiversityChrf => self.diversity_chrf,
            Variable::UniqueOutputs => self.unique_outputs,
        }
    }

    /// Value of `var` as seen from one language pair; source-side variables
    /// are shared by all pairs.
    pub fn get_in(&self, var: Variable, pair: &LangPair) -> Option<f64> {
        let lang = self.per_language.get(pair);
        match var {
            Variable::SourceLength | Variable::SourceErrorsPerWord => self.get(var),
            Variable::DiversityEmbedding => lang?.diversity_embedding,
            Variable::DiversityChrf => lang?.diversity_chrf,
            Variable::UniqueOutputs => lang?.unique_outputs,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    numeric::sum(a.iter().zip(b).map(|(x, y)| x * y))
}

fn pairwise_mean<T>(items: &[T], f: impl Fn(&T, &T) -> Option<f64>) -> Option<f64> {
    let mut values = Vec::new();
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            values.push(f(&items[i], &items[j])?);
        }
    }
    numeric::mean(values)
}

/// Per-segment variables. Segments are returned in test-set order.
pub fn source_variables(
    testset: &TestSet,
    embeddings: Option<&EmbeddingTable>,
    tokenizer: Tokenizer,
    chrf: &ChrfConfig,
) -> Result<Vec<SourceVariables>> {
    chrf.validate().map_err(crate::Error::InvalidInput)?;
    let pairs: Vec<&LangPair> = testset.language_pairs().collect();
    let vars = testset
        .segments()
        .par_iter()
        .map(|seg| {
            let length = tokenizer.count(&seg.text);
            let errors_per_word = match seg.source_error_count {
                Some(c) if length > 0 => Some(f64::from(c) / length as f64),
                _ => None,
            };
            let mut per_language = BTreeMap::new();
            for pair in pairs.iter().filter(|p| p.source == seg.source_lang) {
                let translations: Vec<_> = testset
                    .systems(pair)
                    .into_iter()
                    .flatten()
                    .filter_map(|m| testset.translation(&seg.segment_id, &pair.target, m))
                    .collect();
                if translations.is_empty() {
                    continue;
                }
                let texts: Vec<&str> = translations.iter().map(|t| t.text.as_str()).collect();
                let distinct: BTreeSet<&str> = texts.iter().copied().collect();
                let mut lv = LanguageVariables {
                    unique_outputs: Some(distinct.len() as f64 / texts.len() as f64),
                    ..Default::default()
                };
                if texts.len() >= 2 {
                    lv.diversity_chrf = pairwise_mean(&texts, |a, b| symmetric_chrf(a, b, chrf));
                    if let Some(table) = embeddings {
                        let vectors: Option<Vec<&[f64]>> = translations
                            .iter()
                            .map(|t| table.get(&t.segment_id, &t.target_lang, &t.system_id))
                            .collect();
                        lv.diversity_embedding = vectors.and_then(|v| pairwise_mean(&v, |a, b| Some(dot(a, b))));
                    }
                }
                per_language.insert((*pair).clone(), lv);
            }
            let over_languages = |f: fn(&LanguageVariables) -> Option<f64>| {
                numeric::mean(per_language.values().filter_map(f))
            };
            SourceVariables {
                segment_id: seg.segment_id.clone(),
                length,
                errors_per_word,
                diversity_embedding: over_languages(|l| l.diversity_embedding),
                diversity_chrf: over_languages(|l| l.diversity_chrf),
                unique_outputs: over_languages(|l| l.unique_outputs),
                per_language,
            }
        })
        .collect();
    Ok(vars)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PitfallAggregation {
    /// Pearson r per language pair, then the unweighted mean.
    #[default]
    PerLanguageMean,
    /// One Pearson r over segment-level values.
    Pooled,
}

impl std::str::FromStr for PitfallAggregation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "per_language_mean" | "per_language" => Ok(PitfallAggregation::PerLanguageMean),
            "pooled" => Ok(PitfallAggregation::Pooled),
            _ => Err(format!("unknown pitfall aggregation `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedReason {
    MissingResource,
    ZeroVariance,
    TooFewSegments,
}

impl UndefinedReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            UndefinedReason::MissingResource => "missing_resource",
            UndefinedReason::ZeroVariance => "zero_variance",
            UndefinedReason::TooFewSegments => "too_few_segments",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Correlation {
    Defined { r: f64, n: usize },
    Undefined { reason: UndefinedReason },
}

impl Correlation {
    pub fn value(&self) -> Option<f64> {
        match self {
            Correlation::Defined { r, .. } => Some(*r),
            Correlation::Undefined { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PitfallRow {
    pub estimator: String,
    pub correlations: BTreeMap<Variable, Correlation>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PitfallReport {
    pub aggregation: PitfallAggregation,
    pub rows: Vec<PitfallRow>,
}

impl PitfallReport {
    pub fn get(&self, estimator: &str, var: Variable) -> Option<&Correlation> {
        self.rows.iter().find(|r| r.estimator == estimator)?.correlations.get(&var)
    }

    /// Rows are estimators, columns variables; undefined cells show the reason.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "estimator")?;
        for v in Variable::ALL {
            write!(w, "\t{v}")?;
        }
        writeln!(w)?;
        for row in &self.rows {
            write!(w, "{}", row.estimator)?;
            for v in Variable::ALL {
                match row.correlations.get(&v) {
                    Some(Correlation::Defined { r, .. }) => write!(w, "\t{r:.4}")?,
                    Some(Correlation::Undefined { reason }) => write!(w, "\tNA:{}", reason.as_str())?,
                    None => write!(w, "\tNA")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn correlate(pairs: &[(f64, f64)], any_variable: bool) -> Result<Correlation> {
    if !any_variable {
        return Ok(Correlation::Undefined {
            reason: UndefinedReason::MissingResource,
        });
    }
    if pairs.len() < 2 {
        return Ok(Correlation::Undefined {
            reason: UndefinedReason::TooFewSegments,
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    Ok(match pearson(&x, &y)? {
        Some(r) => Correlation::Defined { r, n: pairs.len() },
        None => Correlation::Undefined {
            reason: UndefinedReason::ZeroVariance,
        },
    })
}

/// Estimate of a segment inside one pair: `(seg, lang, *)`, else the mean of
/// the per-system values.
fn estimate_in(est: &DifficultyEstimate, testset: &TestSet, seg: &str, pair: &LangPair) -> Option<f64> {
    if let Some(v) = est.lookup(seg, Some(&pair.target), None) {
        return Some(v);
    }
    let per_system: Vec<f64> = testset
        .systems(pair)?
        .iter()
        .filter(|m| testset.translation(seg, &pair.target, m).is_some())
        .filter_map(|m| est.lookup(seg, Some(&pair.target), Some(m)))
        .collect();
    numeric::mean(per_system)
}

fn estimate_pooled(est: &DifficultyEstimate, testset: &TestSet, v: &SourceVariables) -> Option<f64> {
    est.lookup(&v.segment_id, None, None).or_else(|| {
        numeric::mean(v.per_language.keys().filter_map(|p| estimate_in(est, testset, &v.segment_id, p)))
    })
}

fn row(
    est: &DifficultyEstimate,
    testset: &TestSet,
    variables: &[SourceVariables],
    aggregation: PitfallAggregation,
) -> Result<PitfallRow> {
    let mut correlations = BTreeMap::new();
    for var in Variable::ALL {
        let any = variables.iter().any(|v| v.get(var).is_some());
        let c = match aggregation {
            PitfallAggregation::Pooled => {
                let pairs: Vec<(f64, f64)> = variables
                    .iter()
                    .filter_map(|v| Some((estimate_pooled(est, testset, v)?, v.get(var)?)))
                    .collect();
                correlate(&pairs, any)?
            }
            PitfallAggregation::PerLanguageMean => {
                let mut defined = Vec::new();
                let mut reason = None;
                for pair in testset.language_pairs() {
                    let pairs: Vec<(f64, f64)> = variables
                        .iter()
                        .filter(|v| v.per_language.contains_key(pair))
                        .filter_map(|v| Some((estimate_in(est, testset, &v.segment_id, pair)?, v.get_in(var, pair)?)))
                        .collect();
                    match correlate(&pairs, any)? {
                        Correlation::Defined { r, n } => defined.push((r, n)),
                        Correlation::Undefined { reason: why } => {
                            reason.get_or_insert(why);
                        }
                    }
                }
                match numeric::mean(defined.iter().map(|d| d.0)) {
                    Some(r) => Correlation::Defined {
                        r,
                        n: defined.iter().map(|d| d.1).sum(),
                    },
                    None => Correlation::Undefined {
                        reason: reason.unwrap_or(UndefinedReason::TooFewSegments),
                    },
                }
            }
        };
        correlations.insert(var, c);
    }
    Ok(PitfallRow {
        estimator: est.name.clone(),
        correlations,
    })
}

/// Pearson correlation of each (canonical, quality-like) estimate with each
/// variable. A negative value means difficulty grows with the variable.
pub fn pitfall_correlations(
    estimates: &[DifficultyEstimate],
    testset: &TestSet,
    variables: &[SourceVariables],
    aggregation: PitfallAggregation,
) -> Result<PitfallReport> {
    let rows = estimates
        .par_iter()
        .map(|e| row(e, testset, variables, aggregation))
        .collect::<Result<Vec<_>>>()?;
    Ok(PitfallReport { aggregation, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Protocol, TestSetBuilder};
    use crate::estimators::text_length_estimate;

    fn testset(rows: &[(&str, &str, Option<u32>, &[&str])]) -> TestSet {
        let mut b = TestSetBuilder::new();
        let pair = LangPair::new("en", "de");
        for (id, text, errors, outputs) in rows {
            b.add_segment(id, "d", "en", text, "news", *errors).unwrap();
            for (i, o) in outputs.iter().enumerate() {
                b.add_translation(id, &pair, &format!("m{i}"), o, Some(50.0), Some(Protocol::Esa), false)
                    .unwrap();
            }
        }
        b.build().unwrap()
    }

    fn vars(ts: &TestSet, emb: Option<&EmbeddingTable>) -> Vec<SourceVariables> {
        source_variables(ts, emb, Tokenizer::default(), &ChrfConfig::default()).unwrap()
    }

    #[test]
    fn identical_outputs() {
        let ts = testset(&[("a", "one two", Some(1), &["same", "same", "same"])]);
        let v = &vars(&ts, None)[0];
        assert_eq!(v.diversity_chrf, Some(100.0));
        assert_eq!(v.unique_outputs, Some(1.0 / 3.0));
        assert_eq!(v.errors_per_word, Some(0.5));
        assert_eq!(v.length, 2);
        assert_eq!(v.diversity_embedding, None);
    }

    #[test]
    fn unique_ratio_two_of_three() {
        let ts = testset(&[("a", "x", None, &["p", "p", "q"])]);
        assert_eq!(vars(&ts, None)[0].unique_outputs, Some(2.0 / 3.0));
        assert_eq!(vars(&ts, None)[0].errors_per_word, None);
    }

    #[test]
    fn orthogonal_embeddings() {
        let ts = testset(&[("a", "x", None, &["p", "q"])]);
        let mut emb = EmbeddingTable::new();
        emb.insert("a", "de", "m0", vec![1.0, 0.0]).unwrap();
        emb.insert("a", "de", "m1", vec![0.0, 1.0]).unwrap();
        assert_eq!(vars(&ts, Some(&emb))[0].diversity_embedding, Some(0.0));
    }

    #[test]
    fn single_translation_has_no_diversity() {
        let ts = testset(&[("a", "x", None, &["p"])]);
        let v = &vars(&ts, None)[0];
        assert_eq!(v.diversity_chrf, None);
        assert_eq!(v.unique_outputs, Some(1.0));
    }

    #[test]
    fn length_anchor_is_minus_one() {
        let ts = testset(&[
            ("a", "one", Some(0), &["p", "q"]),
            ("b", "one two three", Some(3), &["p", "p"]),
            ("c", "one two", Some(1), &["pq", "qp"]),
        ]);
        let v = vars(&ts, None);
        let est = text_length_estimate("length", &ts, Tokenizer::default());
        for agg in [PitfallAggregation::PerLanguageMean, PitfallAggregation::Pooled] {
            let rep = pitfall_correlations(std::slice::from_ref(&est), &ts, &v, agg).unwrap();
            assert_eq!(rep.get("length", Variable::SourceLength).unwrap().value(), Some(-1.0));
            assert_eq!(
                rep.get("length", Variable::DiversityEmbedding),
                Some(&Correlation::Undefined {
                    reason: UndefinedReason::MissingResource
                })
            );
        }
    }

    #[test]
    fn hand_built_pearson() {
        // lengths 1..=5, estimate e = [2, 1, 4, 3, 5]
        // mean 3 each; sxy = 2+2+0+0+4 = 8, sxx = syy = 10 → r = 0.8
        let texts = ["a", "a b", "a b c", "a b c d", "a b c d e"];
        let ids = ["s1", "s2", "s3", "s4", "s5"];
        let rows: Vec<(&str, &str, Option<u32>, &[&str])> =
            ids.iter().zip(texts).map(|(i, t)| (*i, t, None, &["x"][..])).collect();
        let ts = testset(&rows);
        let scores = crate::corpus::ScoreMap::from_entries(
            ids.iter()
                .zip([2.0, 1.0, 4.0, 3.0, 5.0])
                .map(|(i, v)| (crate::corpus::ScoreKey::source(*i), v)),
        )
        .unwrap();
        let est = DifficultyEstimate::new("e", scores);
        let rep = pitfall_correlations(&[est], &ts, &vars(&ts, None), PitfallAggregation::Pooled).unwrap();
        let r = rep.get("e", Variable::SourceLength).unwrap().value().unwrap();
        assert!((r - 0.8).abs() < 1e-12, "{r}");
        assert_eq!(
            rep.get("e", Variable::UniqueOutputs),
            Some(&Correlation::Undefined {
                reason: UndefinedReason::ZeroVariance
            })
        );
    }

    #[test]
    fn tsv_shape() {
        let ts = testset(&[("a", "one", None, &["p"]), ("b", "one two", None, &["p"])]);
        let est = text_length_estimate("length", &ts, Tokenizer::default());
        let rep = pitfall_correlations(&[est], &ts, &vars(&ts, None), PitfallAggregation::Pooled).unwrap();
        let mut out = Vec::new();
        rep.write_tsv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("length\t-1.0000\tNA:missing_resource"));
    }
}
