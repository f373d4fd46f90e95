use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{BufRead, BufReader};

use anyhow::{bail, Context, Result};
use mtdiff::estimators::{
    estimate_text_length, estimate_word_rarity, random_score, EstimatorKind, EstimatorSpec,
};
use serde_json::json;

use super::{finish, new_manifest, Ctx};
use crate::config::spec_summary;
use crate::table::{Cell, Table};
use crate::Exit;

/// Heap entry ordered by `(score, id)`; the heap top is the easiest kept line.
struct Entry {
    score: f64,
    id: String,
    text: String,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score.total_cmp(&other.score).then_with(|| self.id.cmp(&other.id))
    }
}

/// Keeps the `k` smallest entries seen so far.
struct Hardest {
    k: usize,
    heap: BinaryHeap<Entry>,
}

impl Hardest {
    fn push(&mut self, e: Entry) {
        if self.heap.len() < self.k {
            self.heap.push(e);
        } else if self.heap.peek().is_some_and(|top| e < *top) {
            self.heap.pop();
            self.heap.push(e);
        }
    }
}

fn check_kind(spec: &EstimatorSpec) -> Result<()> {
    match &spec.kind {
        k if k.requires_human_scores() => bail!(Exit::Usage(format!(
            "estimator `{}` needs human scores and cannot scan a raw corpus",
            spec.name
        ))),
        EstimatorKind::TextLength { .. }
        | EstimatorKind::WordRarity { .. }
        | EstimatorKind::Random { .. }
        | EstimatorKind::Constant { .. } => Ok(()),
        _ => bail!(Exit::Usage(format!(
            "estimator `{}` is not a per-line source estimator; scan supports text_length, word_rarity, random and constant",
            spec.name
        ))),
    }
}

pub fn run(ctx: &Ctx, input: Option<std::path::PathBuf>, top: Option<usize>) -> Result<()> {
    let input = input
        .or_else(|| ctx.cfg.scan.input.clone())
        .ok_or_else(|| Exit::Usage("scan needs --input".into()))?;
    if !input.exists() {
        bail!(Exit::Usage(format!("input {} does not exist", input.display())));
    }
    let k = top.or(ctx.cfg.scan.top).unwrap_or(100);
    if k == 0 {
        bail!(Exit::Usage("--top must be positive".into()));
    }
    let specs = ctx.estimator_specs()?;
    let [spec] = &specs[..] else {
        bail!(Exit::Usage("scan takes exactly one estimator".into()));
    };
    check_kind(spec)?;

    let mut manifest = new_manifest(ctx, "scan");
    manifest.options["top"] = json!(k);
    manifest.options["estimators"] = json!([spec_summary(spec)]);
    manifest.record_input("corpus", &input)?;
    let lexicon = match spec.kind {
        EstimatorKind::WordRarity { .. } => Some(
            ctx.lexicon(&mut manifest)?
                .ok_or_else(|| Exit::Usage("word_rarity needs a frequency lexicon (--lexicon)".into()))?,
        ),
        _ => None,
    };
    let seed = match spec.kind {
        EstimatorKind::Random { seed } => Some(
            seed.or(ctx.seed)
                .ok_or_else(|| Exit::Usage("random estimator needs a seed (--seed or seed=N)".into()))?,
        ),
        _ => None,
    };
    let score = |id: &str, text: &str| -> f64 {
        match &spec.kind {
            EstimatorKind::TextLength { tokenizer } => estimate_text_length(text, *tokenizer),
            EstimatorKind::WordRarity {
                tokenizer,
                paper_literal,
            } => estimate_word_rarity(text, lexicon.as_ref().expect("checked"), *tokenizer, *paper_literal),
            EstimatorKind::Random { .. } => random_score(seed.expect("checked"), id),
            EstimatorKind::Constant { value } => *value,
            _ => unreachable!("checked by check_kind"),
        }
    };

    let reader = BufReader::new(File::open(&input).with_context(|| format!("opening {}", input.display()))?);
    let mut hardest = Hardest {
        k,
        heap: BinaryHeap::with_capacity(k + 1),
    };
    let mut lines = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line = line.with_context(|| format!("reading {} line {}", input.display(), i + 1))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = match line.split_once('\t') {
            Some((id, text)) => (id.to_string(), text),
            None => (format!("{:010}", i + 1), line),
        };
        let text = mtdiff::tokenize::normalize_text(text);
        let s = score(&id, &text);
        hardest.push(Entry { score: s, id, text });
        lines += 1;
    }
    if lines < k {
        log::warn!("corpus has {lines} lines, fewer than --top {k}");
    }

    let dir = ctx.command_dir("scan")?;
    let mut table = Table::new(["position", "segment_id", "estimate", "text"]);
    for (i, e) in hardest.heap.into_sorted_vec().into_iter().enumerate() {
        table.push(vec![Cell::int(i + 1), Cell::Str(e.id), Cell::Float(e.score, 6), Cell::Str(e.text)]);
    }
    let outputs = vec![table.write(&dir, "top", ctx.format)?];
    println!("scanned {lines} lines, kept {}", table.rows.len());
    finish(&dir, &mut manifest, &outputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_the_k_smallest_with_id_ties() {
        let mut h = Hardest {
            k: 3,
            heap: BinaryHeap::new(),
        };
        for (s, id) in [(5.0, "a"), (1.0, "b"), (3.0, "c"), (1.0, "a"), (9.0, "d"), (3.0, "b")] {
            h.push(Entry {
                score: s,
                id: id.into(),
                text: String::new(),
            });
        }
        let kept: Vec<(f64, String)> = h.heap.into_sorted_vec().into_iter().map(|e| (e.score, e.id)).collect();
        assert_eq!(kept, vec![(1.0, "a".into()), (1.0, "b".into()), (3.0, "b".into())]);
    }
}
