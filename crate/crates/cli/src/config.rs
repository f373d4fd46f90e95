use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mtdiff::estimators::{EstimatorKind, EstimatorSpec};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::table::OutputFormat;
use crate::Exit;

/// Run configuration read from TOML. Relative paths are resolved against
/// the directory holding the config file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub testset: Option<PathBuf>,
    pub testset_format: Option<String>,
    pub domains: Option<Vec<String>>,
    pub lexicon: Option<PathBuf>,
    pub lexicon_floor: Option<f64>,
    pub parses: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    #[serde(default)]
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default)]
    pub evaluate: EvaluateSection,
    #[serde(default)]
    pub rank: RankSection,
    #[serde(default)]
    pub select: SelectSection,
    #[serde(default)]
    pub analyze: AnalyzeSection,
    #[serde(default)]
    pub scan: ScanSection,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSection {
    pub grouping: Option<String>,
    pub skip_policy: Option<String>,
    pub agreement: Option<Vec<String>>,
    pub per_system: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankSection {
    pub resamples: Option<usize>,
    pub alpha: Option<f64>,
    pub grouping: Option<String>,
    pub skip_policy: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectSection {
    pub budget: Option<String>,
    pub scope: Option<String>,
    pub budgets: Option<Vec<String>>,
    pub perfect: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    pub aggregation: Option<String>,
    pub bin_width: Option<f64>,
    pub anchor: Option<f64>,
    pub tokenizer: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub input: Option<PathBuf>,
    pub top: Option<usize>,
}

fn rebase(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Exit::Usage(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        for p in [
            &mut cfg.testset,
            &mut cfg.lexicon,
            &mut cfg.parses,
            &mut cfg.embeddings,
            &mut cfg.out,
            &mut cfg.scan.input,
        ] {
            rebase(&base, p);
        }
        for spec in &mut cfg.estimators {
            spec.kind.rebase(&base);
        }
        Ok(cfg)
    }
}

/// Parse a snake_case enum value through its serde representation.
pub fn parse_enum<T: DeserializeOwned>(what: &str, s: &str) -> Result<T> {
    serde_json::from_value(Value::String(s.to_string()))
        .map_err(|_| Exit::Usage(format!("invalid {what} `{s}`")).into())
}

fn scalar(key: &str, raw: &str) -> Value {
    if key == "path" || key == "tokenizer" {
        return Value::String(raw.to_string());
    }
    if key == "paths" {
        return Value::Array(raw.split('+').map(|p| Value::String(p.to_string())).collect());
    }
    if let Ok(v) = raw.parse::<u64>() {
        return Value::from(v);
    }
    if let Ok(v) = raw.parse::<f64>() {
        return Value::from(v);
    }
    match raw {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => Value::String(raw.to_string()),
    }
}

/// Parse `NAME=KIND[:key=value,...]`; crowd paths are joined with `+`.
pub fn parse_estimator(arg: &str) -> Result<EstimatorSpec> {
    let usage = |msg: String| -> anyhow::Error { Exit::Usage(format!("--estimator `{arg}`: {msg}")).into() };
    let (name, rest) = arg.split_once('=').ok_or_else(|| usage("expected NAME=KIND".into()))?;
    let (kind, params) = match rest.split_once(':') {
        Some((k, p)) => (k, Some(p)),
        None => (rest, None),
    };
    let mut obj = Map::new();
    obj.insert("name".into(), Value::String(name.to_string()));
    obj.insert("kind".into(), Value::String(kind.to_string()));
    for kv in params.into_iter().flat_map(|p| p.split(',')).filter(|s| !s.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("bad parameter `{kv}`")))?;
        obj.insert(k.to_string(), scalar(k, v));
    }
    serde_json::from_value(Value::Object(obj)).map_err(|e| usage(e.to_string()))
}

pub fn validate_estimators(specs: &[EstimatorSpec]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for spec in specs {
        let ok = !spec.name.is_empty()
            && spec
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
        if !ok {
            bail!(Exit::Usage(format!(
                "estimator name `{}` must use only letters, digits, `_`, `-` or `.`",
                spec.name
            )));
        }
        if !seen.insert(spec.name.as_str()) {
            bail!(Exit::Usage(format!("duplicate estimator name `{}`", spec.name)));
        }
        for path in spec_paths(&spec.kind) {
            if !path.exists() {
                bail!(Exit::Usage(format!(
                    "estimator `{}`: file {} does not exist",
                    spec.name,
                    path.display()
                )));
            }
        }
    }
    Ok(())
}

pub fn spec_paths(kind: &EstimatorKind) -> Vec<&Path> {
    match kind {
        EstimatorKind::External { path, .. } => vec![path.as_path()],
        EstimatorKind::CrowdAggregate { paths, .. } => paths.iter().map(PathBuf::as_path).collect(),
        _ => Vec::new(),
    }
}

/// Spec as JSON with file paths reduced to file names.
pub fn spec_summary(spec: &EstimatorSpec) -> Value {
    let mut v = serde_json::to_value(spec).expect("serializable spec");
    let name_of = |p: &Value| {
        p.as_str()
            .map(|s| Value::String(crate::manifest::file_name(Path::new(s))))
            .unwrap_or(Value::Null)
    };
    if let Some(obj) = v.as_object_mut() {
        if let Some(p) = obj.get("path").map(name_of) {
            obj.insert("path".into(), p);
        }
        if let Some(Value::Array(ps)) = obj.get("paths") {
            let names: Vec<Value> = ps.iter().map(name_of).collect();
            obj.insert("paths".into(), Value::Array(names));
        }
    }
    v
}
