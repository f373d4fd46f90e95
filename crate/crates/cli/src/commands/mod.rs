use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mtdiff::corpus::{
    load_embeddings, load_frequency_lexicon, load_parses, load_testset_with, EmbeddingTable, FrequencyLexicon,
    LoadOptions, ParseTable, TestSet, TestSetFormat,
};
use mtdiff::estimators::{run_estimator, DifficultyEstimate, EstimatorKind, EstimatorSpec, Resources};
use serde_json::Value;

use crate::config::{parse_estimator, spec_paths, spec_summary, validate_estimators, RunConfig};
use crate::manifest::Manifest;
use crate::table::OutputFormat;
use crate::{Cli, Command, Exit, InputArgs};

mod analyze;
mod chrf;
mod evaluate;
mod rank;
mod scan;
mod score;
mod select;

/// Resolved global settings plus the command's input flags.
pub struct Ctx {
    pub cfg: RunConfig,
    pub inputs: InputArgs,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub format: OutputFormat,
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let inputs = match &cli.command {
        Command::Score { inputs }
        | Command::Evaluate { inputs, .. }
        | Command::Rank { inputs, .. }
        | Command::Select { inputs, .. }
        | Command::Analyze { inputs, .. }
        | Command::Scan { inputs, .. } => inputs.clone(),
        Command::Chrf { .. } => InputArgs::default(),
    };
    let ctx = Ctx {
        seed: cli.seed.or(cfg.seed),
        out: cli.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("mtdiff-out")),
        format: cli.format.or(cfg.format).unwrap_or_default(),
        inputs,
        cfg,
    };
    match cli.command {
        Command::Score { .. } => score::run(&ctx),
        Command::Evaluate {
            grouping,
            skip_policy,
            agreement,
            per_system,
            ..
        } => evaluate::run(&ctx, grouping, skip_policy, agreement, per_system),
        Command::Rank {
            resamples,
            alpha,
            grouping,
            skip_policy,
            ..
        } => rank::run(&ctx, resamples, alpha, grouping, skip_policy),
        Command::Select {
            budget,
            scope,
            budgets,
            perfect,
            ..
        } => select::run(&ctx, budget, scope, budgets, perfect),
        Command::Analyze {
            aggregation,
            bin_width,
            anchor,
            tokenizer,
            ..
        } => analyze::run(&ctx, aggregation, bin_width, anchor, tokenizer),
        Command::Scan { input, top, .. } => scan::run(&ctx, input, top),
        Command::Chrf {
            hyp,
            reference,
            max_n,
            beta,
            whitespace,
        } => chrf::run(&ctx, &hyp, &reference, max_n, beta, whitespace),
    }
}

fn existing(path: PathBuf, what: &str) -> Result<PathBuf> {
    if !path.exists() {
        bail!(Exit::Usage(format!("{what} {} does not exist", path.display())));
    }
    Ok(path)
}

impl Ctx {
    fn path(&self, cli: &Option<PathBuf>, cfg: &Option<PathBuf>, what: &str) -> Result<Option<PathBuf>> {
        cli.clone().or_else(|| cfg.clone()).map(|p| existing(p, what)).transpose()
    }

    /// Create and return `<out>/<command>`.
    pub fn command_dir(&self, command: &str) -> Result<PathBuf> {
        let dir = self.out.join(command);
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    pub fn load_testset(&self, manifest: &mut Manifest) -> Result<TestSet> {
        let path = self
            .path(&self.inputs.testset, &self.cfg.testset, "test set")?
            .ok_or_else(|| Exit::Usage("a test set is required (--testset or `testset` in the config)".into()))?;
        let format = match self.inputs.testset_format.as_ref().or(self.cfg.testset_format.as_ref()) {
            Some(f) => f.parse::<TestSetFormat>().map_err(Exit::Usage)?,
            None => TestSetFormat::from_path(&path),
        };
        let opts = LoadOptions {
            domains: self.cfg.domains.as_ref().map(|d| d.iter().cloned().collect()),
        };
        manifest.record_input("testset", &path)?;
        Ok(load_testset_with(&path, format, &opts)?)
    }

    pub fn lexicon(&self, manifest: &mut Manifest) -> Result<Option<FrequencyLexicon>> {
        let Some(path) = self.path(&self.inputs.lexicon, &self.cfg.lexicon, "lexicon")? else {
            return Ok(None);
        };
        manifest.record_input("lexicon", &path)?;
        let floor = self.inputs.lexicon_floor.or(self.cfg.lexicon_floor).unwrap_or(0.0);
        Ok(Some(load_frequency_lexicon(&path, floor)?))
    }

    pub fn parses(&self, manifest: &mut Manifest) -> Result<Option<ParseTable>> {
        let Some(path) = self.path(&self.inputs.parses, &self.cfg.parses, "parses")? else {
            return Ok(None);
        };
        manifest.record_input("parses", &path)?;
        Ok(Some(load_parses(&path)?))
    }

    pub fn embeddings(&self, manifest: &mut Manifest) -> Result<Option<EmbeddingTable>> {
        let Some(path) = self.path(&self.inputs.embeddings, &self.cfg.embeddings, "embeddings")? else {
            return Ok(None);
        };
        manifest.record_input("embeddings", &path)?;
        Ok(Some(load_embeddings(&path)?))
    }

    pub fn estimator_specs(&self) -> Result<Vec<EstimatorSpec>> {
        let specs = if self.inputs.estimators.is_empty() {
            self.cfg.estimators.clone()
        } else {
            self.inputs
                .estimators
                .iter()
                .map(|a| parse_estimator(a))
                .collect::<Result<Vec<_>>>()?
        };
        if specs.is_empty() {
            bail!(Exit::Usage("no estimators given (--estimator or [[estimators]] in the config)".into()));
        }
        validate_estimators(&specs)?;
        Ok(specs)
    }

    /// Run every configured estimator, loading only the resources they need.
    pub fn run_estimators(&self, testset: &TestSet, manifest: &mut Manifest) -> Result<Vec<DifficultyEstimate>> {
        let specs = self.estimator_specs()?;
        let needs = |f: fn(&EstimatorKind) -> bool| specs.iter().any(|s| f(&s.kind));
        let lexicon = if needs(|k| matches!(k, EstimatorKind::WordRarity { .. })) {
            let lex = self.lexicon(manifest)?;
            if lex.is_none() {
                bail!(Exit::Usage("word_rarity needs a frequency lexicon (--lexicon)".into()));
            }
            lex
        } else {
            None
        };
        let parses = if needs(|k| matches!(k, EstimatorKind::SyntacticComplexity { .. })) {
            let p = self.parses(manifest)?;
            if p.is_none() {
                bail!(Exit::Usage("syntactic_complexity needs parses (--parses)".into()));
            }
            p
        } else {
            None
        };
        if self.seed.is_none() && specs.iter().any(|s| matches!(s.kind, EstimatorKind::Random { seed: None })) {
            bail!(Exit::Usage("random estimator needs a seed (--seed or seed=N)".into()));
        }
        let resources = Resources {
            lexicon: lexicon.as_ref(),
            parses: parses.as_ref(),
            seed: self.seed,
        };
        let mut out = Vec::with_capacity(specs.len());
        for spec in &specs {
            for p in spec_paths(&spec.kind) {
                manifest.record_input(&format!("estimator:{}", spec.name), p)?;
            }
            out.push(run_estimator(spec, testset, &resources)?);
        }
        manifest.options["estimators"] = Value::Array(specs.iter().map(spec_summary).collect());
        Ok(out)
    }
}

pub fn new_manifest(ctx: &Ctx, command: &str) -> Manifest {
    let mut m = Manifest::new(command, ctx.seed);
    m.options = serde_json::json!({ "format": ctx.format });
    m
}

pub fn finish(dir: &Path, manifest: &mut Manifest, outputs: &[PathBuf]) -> Result<()> {
    for p in outputs {
        manifest.record_output(p);
    }
    manifest.write(dir)
}
