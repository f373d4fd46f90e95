use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::oracle::{oracle, OracleLevel};
use super::{
    canonicalize, constant_estimator, crowd_aggregate, random_estimator, syntactic_complexity_estimate,
    text_length_estimate, word_rarity_estimate, CrowdMode, DifficultyEstimate, HeightAggregation,
};
use crate::corpus::{load_scores, FrequencyLexicon, Orientation, ParseTable, TestSet};
use crate::error::{Error, Result};
use crate::tokenize::Tokenizer;

/// Estimator kind plus its parameters. Deserializes from a table tagged by
/// `kind`, e.g. `{ kind = "external", path = "s.tsv", orientation = "quality_like" }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorKind {
    TextLength {
        #[serde(default)]
        tokenizer: Tokenizer,
    },
    WordRarity {
        #[serde(default)]
        tokenizer: Tokenizer,
        #[serde(default)]
        paper_literal: bool,
    },
    SyntacticComplexity {
        #[serde(default)]
        aggregation: HeightAggregation,
    },
    External {
        path: PathBuf,
        #[serde(default = "default_orientation")]
        orientation: Orientation,
    },
    CrowdAggregate {
        paths: Vec<PathBuf>,
        #[serde(default)]
        mode: CrowdMode,
    },
    OracleFull,
    OracleSrcLang,
    OracleSrc,
    Random {
        #[serde(default)]
        seed: Option<u64>,
    },
    Constant {
        #[serde(default)]
        value: f64,
    },
}

fn default_orientation() -> Orientation {
    Orientation::QualityLike
}

impl EstimatorKind {
    /// Whether the estimator reads the gold human scores.
    pub fn requires_human_scores(&self) -> bool {
        matches!(
            self,
            EstimatorKind::OracleFull | EstimatorKind::OracleSrcLang | EstimatorKind::OracleSrc
        )
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, EstimatorKind::Random { .. })
    }

    /// Resolve relative paths against `base`.
    pub fn rebase(&mut self, base: &std::path::Path) {
        match self {
            EstimatorKind::External { path, .. } => {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
            EstimatorKind::CrowdAggregate { paths, .. } => {
                for p in paths.iter_mut().filter(|p| p.is_relative()) {
                    *p = base.join(&*p);
                }
            }
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: EstimatorKind,
}

/// Shared resources some estimators need.
#[derive(Clone, Copy, Debug, Default)]
pub struct Resources<'a> {
    pub lexicon: Option<&'a FrequencyLexicon>,
    pub parses: Option<&'a ParseTable>,
    /// Seed used by stochastic estimators that do not carry their own.
    pub seed: Option<u64>,
}

pub fn run_estimator(spec: &EstimatorSpec, testset: &TestSet, resources: &Resources<'_>) -> Result<DifficultyEstimate> {
    let name = spec.name.as_str();
    let mut estimate = match &spec.kind {
        EstimatorKind::TextLength { tokenizer } => text_length_estimate(name, testset, *tokenizer),
        EstimatorKind::WordRarity {
            tokenizer,
            paper_literal,
        } => {
            let lexicon = resources
                .lexicon
                .ok_or_else(|| Error::InvalidInput(format!("estimator `{name}` (word_rarity) needs a frequency lexicon")))?;
            word_rarity_estimate(name, testset, lexicon, *tokenizer, *paper_literal)
        }
        EstimatorKind::SyntacticComplexity { aggregation } => {
            let parses = resources.parses.ok_or_else(|| {
                Error::InvalidInput(format!("estimator `{name}` (syntactic_complexity) needs parses"))
            })?;
            syntactic_complexity_estimate(name, testset, parses, *aggregation)
        }
        EstimatorKind::External { path, orientation } => canonicalize(&load_scores(path, name, *orientation)?),
        EstimatorKind::CrowdAggregate { paths, mode } => {
            let tables = paths
                .iter()
                .map(|p| {
                    let table_name = p.file_stem().and_then(|s| s.to_str()).unwrap_or(name);
                    load_scores(p, table_name, Orientation::QualityLike)
                })
                .collect::<Result<Vec<_>>>()?;
            crowd_aggregate(name, &tables, *mode)?
        }
        EstimatorKind::OracleFull => oracle(testset, OracleLevel::Full)?,
        EstimatorKind::OracleSrcLang => oracle(testset, OracleLevel::SrcLang)?,
        EstimatorKind::OracleSrc => oracle(testset, OracleLevel::Src)?,
        EstimatorKind::Random { seed } => {
            let seed = seed
                .or(resources.seed)
                .ok_or_else(|| Error::InvalidInput(format!("estimator `{name}` (random) needs a seed")))?;
            random_estimator(testset, seed)
        }
        EstimatorKind::Constant { value } => constant_estimator(testset, *value),
    };
    estimate.name = name.to_string();
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_deserialize_from_tagged_json() {
        let spec: EstimatorSpec =
            serde_json::from_str(r#"{"name":"len","kind":"text_length","tokenizer":"whitespace"}"#).unwrap();
        assert_eq!(
            spec.kind,
            EstimatorKind::TextLength {
                tokenizer: Tokenizer::Whitespace
            }
        );
        let spec: EstimatorSpec = serde_json::from_str(r#"{"name":"o","kind":"oracle_src"}"#).unwrap();
        assert!(spec.kind.requires_human_scores());
        let bad = serde_json::from_str::<EstimatorSpec>(r#"{"name":"x","kind":"external"}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn missing_resources_are_reported() {
        let ts = crate::corpus::TestSetBuilder::new().build().unwrap();
        let spec = EstimatorSpec {
            name: "rar".into(),
            kind: EstimatorKind::WordRarity {
                tokenizer: Tokenizer::default(),
                paper_literal: false,
            },
        };
        assert!(matches!(
            run_estimator(&spec, &ts, &Resources::default()),
            Err(Error::InvalidInput(_))
        ));
        let spec = EstimatorSpec {
            name: "r".into(),
            kind: EstimatorKind::Random { seed: None },
        };
        assert!(run_estimator(&spec, &ts, &Resources::default()).is_err());
    }
}
