use anyhow::{bail, Result};
use mtdiff::benchmark::{
    budget_sweep, default_budgets, domain_breakdown, select_top, Budget, PerfectRule, SelectionResult,
    SelectionScope,
};
use mtdiff::corpus::TestSet;
use mtdiff::estimators::DifficultyEstimate;
use serde_json::json;

use super::{finish, new_manifest, Ctx};
use crate::table::{Cell, OutputFormat, Table};
use crate::Exit;

fn budget(s: &str) -> Result<Budget> {
    Ok(s.parse::<Budget>().map_err(Exit::Usage)?)
}

/// Whether `est` has a score at the key level `scope` reads.
fn resolvable(est: &DifficultyEstimate, testset: &TestSet, scope: SelectionScope) -> bool {
    match scope {
        SelectionScope::Src => testset.segments().iter().any(|s| est.lookup(&s.segment_id, None, None).is_some()),
        SelectionScope::PerTargetLang => testset
            .translations()
            .iter()
            .any(|t| est.lookup(&t.segment_id, Some(&t.target_lang), None).is_some()),
    }
}

fn metric_rows(t: &mut Table, method: &str, extra: Option<&str>, r: &SelectionResult) {
    let prefix = |mut cells: Vec<Cell>| {
        let mut row = vec![Cell::str(method)];
        if let Some(e) = extra {
            row.push(Cell::str(e));
        }
        row.append(&mut cells);
        row
    };
    for (pair, m) in &r.per_language_metrics {
        t.push(prefix(vec![
            Cell::str(pair.to_string()),
            Cell::int(m.segments),
            Cell::Float(m.avg_score, 4),
            Cell::Float(m.pct_perfect, 4),
        ]));
    }
    t.push(prefix(vec![
        Cell::str("macro"),
        Cell::int(r.per_language_selected.values().map(Vec::len).sum()),
        Cell::opt(Some(r.macro_avg_score), 4),
        Cell::opt(Some(r.macro_pct_perfect), 4),
    ]));
}

pub fn run(
    ctx: &Ctx,
    budget_arg: Option<String>,
    scope: Option<String>,
    budgets: Option<Vec<String>>,
    perfect: Option<String>,
) -> Result<()> {
    let sec = &ctx.cfg.select;
    let b = budget(&budget_arg.or_else(|| sec.budget.clone()).unwrap_or_else(|| "25%".into()))?;
    let scope: SelectionScope = match scope.or_else(|| sec.scope.clone()) {
        Some(s) => s.parse().map_err(Exit::Usage)?,
        None => SelectionScope::default(),
    };
    let grid = match budgets.or_else(|| sec.budgets.clone()) {
        Some(list) => list.iter().map(|s| budget(s)).collect::<Result<Vec<_>>>()?,
        None => default_budgets(),
    };
    let rule = match perfect.or_else(|| sec.perfect.clone()).as_deref() {
        None | Some("protocol") => PerfectRule::ByProtocol,
        Some(v) => PerfectRule::Equals(
            v.parse()
                .map_err(|_| Exit::Usage(format!("--perfect must be `protocol` or a number, got `{v}`")))?,
        ),
    };

    let mut manifest = new_manifest(ctx, "select");
    manifest.options["budget"] = json!(b.to_string());
    manifest.options["scope"] = json!(scope);
    manifest.options["budgets"] = json!(grid.iter().map(Budget::to_string).collect::<Vec<_>>());
    manifest.options["perfect"] = json!(rule);
    let testset = ctx.load_testset(&mut manifest)?;
    let estimates = ctx.run_estimators(&testset, &mut manifest)?;
    let dir = ctx.command_dir("select")?;

    let mut subset = Table::new(["method", "language_pair", "position", "segment_id", "estimate"]);
    let mut metrics = Table::new(["method", "language_pair", "segments", "avg_score", "pct_perfect"]);
    let mut sweep = Table::new(["method", "budget", "selected", "avg_score", "pct_perfect"]);
    let mut domains = Table::new(["method", "domain", "language_pair", "segments", "avg_score", "pct_perfect"]);
    let mut warnings = Table::new(["method", "warning"]);

    let mut used = 0usize;
    for est in &estimates {
        if !resolvable(est, &testset, scope) {
            let msg = format!("skipped: no estimate at the key level of scope {scope}");
            log::warn!("{}: {msg}", est.name);
            warnings.push(vec![Cell::str(&est.name), Cell::str(msg)]);
            continue;
        }
        used += 1;
        let r = select_top(est, &testset, b, scope, &rule)?;
        for (pair, segs) in &r.per_language_selected {
            for (i, s) in segs.iter().enumerate() {
                subset.push(vec![
                    Cell::str(&est.name),
                    Cell::str(pair.to_string()),
                    Cell::int(i + 1),
                    Cell::str(&s.segment_id),
                    Cell::Float(s.score, 6),
                ]);
            }
        }
        metric_rows(&mut metrics, &est.name, None, &r);
        for w in &r.warnings {
            warnings.push(vec![Cell::str(&est.name), Cell::str(w)]);
        }
        for p in budget_sweep(est, &testset, &grid, scope, &rule)? {
            sweep.push(vec![
                Cell::str(&est.name),
                Cell::str(p.budget.to_string()),
                Cell::int(p.selected),
                Cell::Float(p.macro_avg_score, 4),
                Cell::Float(p.macro_pct_perfect, 4),
            ]);
        }
        for (domain, d) in domain_breakdown(est, &testset, b, scope, &rule)? {
            metric_rows(&mut domains, &est.name, Some(&domain), &d);
        }
    }
    let outputs = vec![
        subset.write(&dir, "subset", ctx.format)?,
        metrics.write(&dir, "metrics", ctx.format)?,
        sweep.write(&dir, "sweep", ctx.format)?,
        domains.write(&dir, "domains", ctx.format)?,
        warnings.write(&dir, "warnings", ctx.format)?,
    ];
    metrics.write_to(std::io::stdout().lock(), OutputFormat::Tsv)?;
    finish(&dir, &mut manifest, &outputs)?;
    if used == 0 {
        bail!(Exit::Usage(format!("no estimator resolves at scope {scope}")));
    }
    Ok(())
}
