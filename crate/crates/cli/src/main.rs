//! `mtdiff` command-line front end.
//!
//! Exit codes: 0 success, 1 every requested result was undefined,
//! 2 usage or validation error.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod manifest;
mod table;

use table::OutputFormat;

/// Failure classes that map to specific exit codes.
#[derive(Debug)]
pub enum Exit {
    Usage(String),
    Undefined(String),
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exit::Usage(m) | Exit::Undefined(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for Exit {}

#[derive(Parser, Debug)]
#[command(name = "mtdiff", version, about = "Translation difficulty estimation and difficult-benchmark construction")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every stochastic step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; each command writes into its own subdirectory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct InputArgs {
    #[arg(long)]
    pub testset: Option<PathBuf>,
    /// `jsonl` or `tsv`; guessed from the extension by default.
    #[arg(long)]
    pub testset_format: Option<String>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Value for tokens missing from the lexicon.
    #[arg(long)]
    pub lexicon_floor: Option<f64>,
    /// CoNLL-U parses keyed by `# segment_id = ...` comments.
    #[arg(long)]
    pub parses: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// `NAME=KIND[:key=value,...]`, repeatable; replaces the config's list.
    #[arg(long = "estimator")]
    pub estimators: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write one score table per estimator.
    Score {
        #[command(flatten)]
        inputs: InputArgs,
    },
    /// DEC of each estimator, with per-cell detail and skip diagnostics.
    Evaluate {
        #[command(flatten)]
        inputs: InputArgs,
        /// `by_system` or `by_item`.
        #[arg(long)]
        grouping: Option<String>,
        /// `skip` or `zero`.
        #[arg(long)]
        skip_policy: Option<String>,
        /// Comma-separated system ids for a pairwise agreement matrix.
        #[arg(long, value_delimiter = ',')]
        agreement: Option<Vec<String>>,
        /// Also write per-system mean and spread of τ_b.
        #[arg(long)]
        per_system: bool,
    },
    /// Significance clusters from pairwise permutation tests.
    Rank {
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long)]
        resamples: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        grouping: Option<String>,
        #[arg(long)]
        skip_policy: Option<String>,
    },
    /// Select the hardest segments and report subset metrics.
    Select {
        #[command(flatten)]
        inputs: InputArgs,
        /// Count (`100`) or fraction (`25%`, `0.25`).
        #[arg(long)]
        budget: Option<String>,
        /// `src` or `per_target_lang`.
        #[arg(long)]
        scope: Option<String>,
        /// Budget grid for the sweep, comma-separated.
        #[arg(long, value_delimiter = ',')]
        budgets: Option<Vec<String>>,
        /// Perfect-score rule: `protocol` or a number.
        #[arg(long)]
        perfect: Option<String>,
    },
    /// Pitfall correlations, per-segment variables and score histograms.
    Analyze {
        #[command(flatten)]
        inputs: InputArgs,
        /// `per_language_mean` or `pooled`.
        #[arg(long)]
        aggregation: Option<String>,
        #[arg(long)]
        bin_width: Option<f64>,
        /// Top of the score scale; inferred from the protocol when omitted.
        #[arg(long, allow_hyphen_values = true)]
        anchor: Option<f64>,
        #[arg(long)]
        tokenizer: Option<String>,
    },
    /// Stream a raw corpus and keep the K hardest lines.
    Scan {
        #[command(flatten)]
        inputs: InputArgs,
        /// Lines of `id<TAB>text` or bare text (ids are line numbers).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Line-by-line chrF between two files.
    Chrf {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        /// Keep whitespace inside character n-grams.
        #[arg(long)]
        whitespace: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(anyhow::Error::from)
            .and_then(|pool| pool.install(|| commands::run(cli))),
        None => commands::run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Exit>() {
                Some(Exit::Undefined(_)) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
