use anyhow::{bail, Result};
use mtdiff::analysis::{pitfall_correlations, source_variables, Correlation, PitfallAggregation, Variable};
use mtdiff::benchmark::{score_histogram, HistogramViewKind};
use mtdiff::corpus::{Protocol, TestSet};
use mtdiff::text_metrics::ChrfConfig;
use mtdiff::tokenize::Tokenizer;
use serde_json::json;

use super::{finish, new_manifest, Ctx};
use crate::config::parse_enum;
use crate::table::{Cell, OutputFormat, Table};
use crate::Exit;

/// Top of the score scale shared by every translation's protocol.
fn infer_anchor(testset: &TestSet) -> Result<f64> {
    let mut protocols = testset.translations().iter().map(|t| t.protocol);
    let first = protocols.next().flatten();
    let anchor = first
        .filter(|p| protocols.all(|q| q == Some(*p)))
        .and_then(|p: Protocol| p.perfect_score());
    match anchor {
        Some(a) => Ok(a),
        None => bail!(Exit::Usage(
            "cannot infer the histogram anchor from mixed or missing protocols; pass --anchor".into()
        )),
    }
}

pub fn run(
    ctx: &Ctx,
    aggregation: Option<String>,
    bin_width: Option<f64>,
    anchor: Option<f64>,
    tokenizer: Option<String>,
) -> Result<()> {
    let sec = &ctx.cfg.analyze;
    let aggregation: PitfallAggregation = match aggregation.or_else(|| sec.aggregation.clone()) {
        Some(a) => a.parse().map_err(Exit::Usage)?,
        None => PitfallAggregation::default(),
    };
    let tokenizer: Tokenizer = match tokenizer.or_else(|| sec.tokenizer.clone()) {
        Some(t) => parse_enum("tokenizer", &t)?,
        None => Tokenizer::default(),
    };
    let bin_width = bin_width.or(sec.bin_width).unwrap_or(15.0);

    let mut manifest = new_manifest(ctx, "analyze");
    let testset = ctx.load_testset(&mut manifest)?;
    let anchor = match anchor.or(sec.anchor) {
        Some(a) => a,
        None => infer_anchor(&testset)?,
    };
    manifest.options["aggregation"] = json!(aggregation);
    manifest.options["tokenizer"] = json!(tokenizer);
    manifest.options["bin_width"] = json!(bin_width);
    manifest.options["anchor"] = json!(anchor);
    let embeddings = ctx.embeddings(&mut manifest)?;
    let estimates = ctx.run_estimators(&testset, &mut manifest)?;
    let dir = ctx.command_dir("analyze")?;

    let vars = source_variables(&testset, embeddings.as_ref(), tokenizer, &ChrfConfig::default())?;
    let report = pitfall_correlations(&estimates, &testset, &vars, aggregation)?;

    let mut pitfalls = Table::new(std::iter::once("method".to_string()).chain(Variable::ALL.iter().map(|v| v.to_string())));
    let mut any_defined = false;
    for row in &report.rows {
        let mut cells = vec![Cell::str(&row.estimator)];
        for v in Variable::ALL {
            cells.push(match row.correlations.get(&v) {
                Some(Correlation::Defined { r, .. }) => {
                    any_defined = true;
                    Cell::Float(*r, 4)
                }
                Some(Correlation::Undefined { reason }) => Cell::str(format!("NA:{}", reason.as_str())),
                None => Cell::Na,
            });
        }
        pitfalls.push(cells);
    }

    let mut variables = Table::new(
        std::iter::once("segment_id".to_string()).chain(Variable::ALL.iter().map(|v| v.to_string())),
    );
    for v in &vars {
        let mut cells = vec![Cell::str(&v.segment_id)];
        cells.extend(Variable::ALL.iter().map(|var| Cell::opt(v.get(*var), 6)));
        variables.push(cells);
    }

    let mut histograms = Table::new(["language_pair", "view", "lower", "upper", "count"]);
    let pairs: Vec<_> = testset.language_pairs().cloned().collect();
    for pair in pairs.iter().map(Some).chain(std::iter::once(None)) {
        for view in HistogramViewKind::ALL {
            let h = score_histogram(&testset, pair, view, bin_width, anchor)?;
            for b in &h.bins {
                histograms.push(vec![
                    Cell::str(pair.map(|p| p.to_string()).unwrap_or_else(|| "all".into())),
                    Cell::str(view.as_str()),
                    Cell::Float(b.lower, 2),
                    Cell::Float(b.upper, 2),
                    Cell::int(b.count),
                ]);
            }
        }
    }

    let outputs = vec![
        pitfalls.write(&dir, "pitfalls", ctx.format)?,
        variables.write(&dir, "variables", ctx.format)?,
        histograms.write(&dir, "histograms", ctx.format)?,
    ];
    pitfalls.write_to(std::io::stdout().lock(), OutputFormat::Tsv)?;
    finish(&dir, &mut manifest, &outputs)?;
    if !any_defined {
        bail!(Exit::Undefined("every pitfall correlation is undefined".into()));
    }
    Ok(())
}
