use std::path::Path;

use anyhow::{bail, Context, Result};
use mtdiff::numeric;
use mtdiff::text_metrics::{chrf, ChrfConfig};
use serde_json::json;

use super::{finish, new_manifest, Ctx};
use crate::table::{Cell, Table};
use crate::Exit;

fn read_lines(path: &Path) -> Result<Vec<String>> {
    if !path.exists() {
        bail!(Exit::Usage(format!("{} does not exist", path.display())));
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l).to_string()).collect())
}

pub fn run(ctx: &Ctx, hyp: &Path, reference: &Path, max_n: usize, beta: f64, whitespace: bool) -> Result<()> {
    let config = ChrfConfig {
        max_n,
        beta,
        whitespace_included: whitespace,
    };
    config.validate().map_err(Exit::Usage)?;
    let hyps = read_lines(hyp)?;
    let refs = read_lines(reference)?;
    if hyps.len() != refs.len() {
        bail!(Exit::Usage(format!(
            "line counts differ: {} hypotheses, {} references",
            hyps.len(),
            refs.len()
        )));
    }
    let mut manifest = new_manifest(ctx, "chrf");
    manifest.options["chrf"] = json!(config);
    manifest.record_input("hypotheses", hyp)?;
    manifest.record_input("references", reference)?;

    let scores: Vec<Option<f64>> = hyps.iter().zip(&refs).map(|(h, r)| chrf(h, r, &config)).collect();
    let mut table = Table::new(["line", "chrf"]);
    for (i, s) in scores.iter().enumerate() {
        table.push(vec![Cell::int(i + 1), Cell::opt(*s, 6)]);
    }
    let dir = ctx.command_dir("chrf")?;
    let outputs = vec![table.write(&dir, "chrf", ctx.format)?];
    match numeric::mean(scores.iter().flatten().copied()) {
        Some(m) => println!("mean chrF over {} lines: {m:.4}", scores.iter().flatten().count()),
        None => println!("no line pair has characters to compare"),
    }
    finish(&dir, &mut manifest, &outputs)?;
    if scores.iter().all(Option::is_none) {
        bail!(Exit::Undefined("chrF is undefined for every line".into()));
    }
    Ok(())
}
