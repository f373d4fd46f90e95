use anyhow::Result;
use mtdiff::rank_stats::{Grouping, SkipPolicy};
use mtdiff::significance::{rank_clusters, PermConfig};
use serde_json::json;

use super::{finish, new_manifest, Ctx};
use crate::config::parse_enum;
use crate::table::{Cell, OutputFormat, Table};
use crate::Exit;

pub fn run(
    ctx: &Ctx,
    resamples: Option<usize>,
    alpha: Option<f64>,
    grouping: Option<String>,
    skip_policy: Option<String>,
) -> Result<()> {
    let sec = &ctx.cfg.rank;
    let seed = ctx
        .seed
        .ok_or_else(|| Exit::Usage("rank needs a seed (--seed or `seed` in the config)".into()))?;
    let resamples = resamples.or(sec.resamples).unwrap_or(1000);
    let alpha = alpha.or(sec.alpha).unwrap_or(0.05);
    let mut config = PermConfig::new(resamples, seed);
    if let Some(g) = grouping.or_else(|| sec.grouping.clone()) {
        config.grouping = parse_enum::<Grouping>("grouping", &g)?;
    }
    if let Some(p) = skip_policy.or_else(|| sec.skip_policy.clone()) {
        config.skip_policy = parse_enum::<SkipPolicy>("skip policy", &p)?;
    }

    let mut manifest = new_manifest(ctx, "rank");
    manifest.options["resamples"] = json!(resamples);
    manifest.options["alpha"] = json!(alpha);
    manifest.options["grouping"] = json!(config.grouping);
    manifest.options["skip_policy"] = json!(config.skip_policy);
    let testset = ctx.load_testset(&mut manifest)?;
    let estimates = ctx.run_estimators(&testset, &mut manifest)?;
    if estimates.len() < 2 {
        return Err(Exit::Usage("rank needs at least two estimators".into()).into());
    }
    let dir = ctx.command_dir("rank")?;
    let result = rank_clusters(&estimates, &testset, alpha, &config)?;

    let mut ranks = Table::new(["rank", "method", "dec"]);
    for i in result.order() {
        ranks.push(vec![
            Cell::int(result.ranks[i]),
            Cell::str(&result.names[i]),
            Cell::Float(result.dec_values[i], 3),
        ]);
    }
    let mut pvalues = Table::new(std::iter::once("method".to_string()).chain(result.names.iter().cloned()));
    for (i, row) in result.p_values.iter().enumerate() {
        let mut cells = vec![Cell::str(&result.names[i])];
        cells.extend(row.iter().map(|p| Cell::Float(*p, 6)));
        pvalues.push(cells);
    }
    let outputs = vec![
        ranks.write(&dir, "ranks", ctx.format)?,
        pvalues.write(&dir, "pvalues", ctx.format)?,
    ];
    ranks.write_to(std::io::stdout().lock(), OutputFormat::Tsv)?;
    finish(&dir, &mut manifest, &outputs)
}
