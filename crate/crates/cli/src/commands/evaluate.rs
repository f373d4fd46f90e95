use anyhow::{bail, Result};
use mtdiff::rank_stats::{
    agreement_matrix, dec, per_system_alignment, CorrelationReport, Grouping, SkipPolicy, SkipReason, SkippedCell,
};
use mtdiff::Error;
use serde_json::json;

use super::{finish, new_manifest, Ctx};
use crate::config::parse_enum;
use crate::table::{Cell, Table};
use crate::Exit;

fn reason_str(r: &SkipReason) -> String {
    match r {
        SkipReason::TooFewItems(n) => format!("too_few_items({n})"),
        SkipReason::Tied => "tied".into(),
    }
}

fn skip_note(skipped: &[SkippedCell]) -> String {
    let tied = skipped.iter().filter(|s| s.reason == SkipReason::Tied).count();
    format!(
        "all {} cells skipped ({} tied, {} too few items)",
        skipped.len(),
        tied,
        skipped.len() - tied
    )
}

pub fn run(
    ctx: &Ctx,
    grouping: Option<String>,
    skip_policy: Option<String>,
    agreement: Option<Vec<String>>,
    per_system: bool,
) -> Result<()> {
    let sec = &ctx.cfg.evaluate;
    let grouping: Grouping = match grouping.or_else(|| sec.grouping.clone()) {
        Some(g) => parse_enum("grouping", &g)?,
        None => Grouping::default(),
    };
    let policy: SkipPolicy = match skip_policy.or_else(|| sec.skip_policy.clone()) {
        Some(p) => parse_enum("skip policy", &p)?,
        None => SkipPolicy::default(),
    };
    let agreement = agreement.or_else(|| sec.agreement.clone());
    let per_system = per_system || sec.per_system.unwrap_or(false);

    let mut manifest = new_manifest(ctx, "evaluate");
    manifest.options["grouping"] = json!(grouping);
    manifest.options["skip_policy"] = json!(policy);
    let testset = ctx.load_testset(&mut manifest)?;
    let estimates = ctx.run_estimators(&testset, &mut manifest)?;
    let dir = ctx.command_dir("evaluate")?;

    let mut summary = Table::new(["method", "dec", "defined_cells", "skipped_cells", "missing_estimates", "note"]);
    let mut languages = Table::new(["method", "language_pair", "value"]);
    let mut cells = Table::new([
        "method",
        "language_pair",
        "group",
        "n",
        "tau_b",
        "concordant",
        "discordant",
        "ties_gold_only",
        "ties_hyp_only",
        "ties_both",
        "missing_estimates",
    ]);
    let mut skipped = Table::new(["method", "language_pair", "group", "reason"]);
    let mut any_defined = false;

    for est in &estimates {
        let report: Option<CorrelationReport> = match dec(est, &testset, grouping, policy) {
            Ok(r) => Some(r),
            Err(Error::NoDefinedCells { skipped: s }) => {
                summary.push(vec![
                    Cell::str(&est.name),
                    Cell::str("undefined"),
                    Cell::int(0),
                    Cell::int(s.len()),
                    Cell::Na,
                    Cell::str(skip_note(&s)),
                ]);
                for c in &s {
                    skipped.push(vec![
                        Cell::str(&est.name),
                        Cell::str(c.pair.to_string()),
                        Cell::str(&c.group),
                        Cell::str(reason_str(&c.reason)),
                    ]);
                }
                None
            }
            Err(e) => return Err(e.into()),
        };
        let Some(r) = report else { continue };
        let defined = r.cells.iter().filter(|c| c.value().is_some()).count();
        any_defined |= r.dec.is_some();
        summary.push(vec![
            Cell::str(&est.name),
            r.dec.map(|v| Cell::Float(v, 3)).unwrap_or_else(|| Cell::str("undefined")),
            Cell::int(defined),
            Cell::int(r.skipped.len()),
            Cell::int(r.missing_estimates),
            Cell::str(""),
        ]);
        for (pair, v) in &r.per_language {
            languages.push(vec![Cell::str(&est.name), Cell::str(pair.to_string()), Cell::opt(*v, 6)]);
        }
        for c in &r.cells {
            let t = c.tau;
            let count = |f: fn(&mtdiff::rank_stats::TauResult) -> u64| {
                t.as_ref().map(|t| Cell::Int(f(t) as i64)).unwrap_or(Cell::Na)
            };
            cells.push(vec![
                Cell::str(&est.name),
                Cell::str(c.pair.to_string()),
                Cell::str(&c.group),
                t.map(|t| Cell::int(t.n)).unwrap_or(Cell::Na),
                Cell::opt(c.value(), 6),
                count(|t| t.concordant),
                count(|t| t.discordant),
                count(|t| t.ties_gold_only),
                count(|t| t.ties_hyp_only),
                count(|t| t.ties_both),
                Cell::int(c.missing_estimates),
            ]);
        }
        for c in &r.skipped {
            skipped.push(vec![
                Cell::str(&est.name),
                Cell::str(c.pair.to_string()),
                Cell::str(&c.group),
                Cell::str(reason_str(&c.reason)),
            ]);
        }
    }

    let mut outputs = vec![
        summary.write(&dir, "summary", ctx.format)?,
        languages.write(&dir, "languages", ctx.format)?,
        cells.write(&dir, "cells", ctx.format)?,
        skipped.write(&dir, "skipped", ctx.format)?,
    ];

    if let Some(systems) = agreement {
        let m = agreement_matrix(&testset, &systems)?;
        let mut t = Table::new(std::iter::once("system".to_string()).chain(systems.iter().cloned()));
        for (i, row) in m.iter().enumerate() {
            let mut cells = vec![Cell::str(&systems[i])];
            cells.extend(row.iter().map(|v| Cell::opt(*v, 3)));
            t.push(cells);
        }
        outputs.push(t.write(&dir, "agreement", ctx.format)?);
    }
    if per_system {
        let mut t = Table::new(["method", "system", "mean_tau", "std_tau", "languages"]);
        for est in &estimates {
            for (sys, a) in per_system_alignment(est, &testset, 1)? {
                t.push(vec![
                    Cell::str(&est.name),
                    Cell::str(sys),
                    Cell::Float(a.mean_tau, 6),
                    Cell::Float(a.std_tau, 6),
                    Cell::int(a.language_count),
                ]);
            }
        }
        outputs.push(t.write(&dir, "per_system", ctx.format)?);
    }

    summary.write_to(std::io::stdout().lock(), crate::table::OutputFormat::Tsv)?;
    finish(&dir, &mut manifest, &outputs)?;
    if !any_defined {
        bail!(Exit::Undefined("every estimator's DEC is undefined".into()));
    }
    Ok(())
}
