use std::fs::File;
use std::io::{BufWriter, Write};

use anyhow::Result;

use super::{finish, new_manifest, Ctx};
use crate::table::{Cell, OutputFormat, Table};

pub fn run(ctx: &Ctx) -> Result<()> {
    let mut manifest = new_manifest(ctx, "score");
    let testset = ctx.load_testset(&mut manifest)?;
    let estimates = ctx.run_estimators(&testset, &mut manifest)?;
    let dir = ctx.command_dir("score")?;
    let mut outputs = Vec::new();
    let mut diagnostics = Table::new(["estimator", "message"]);
    for est in &estimates {
        let path = dir.join(format!("{}.{}", est.name, ctx.format.extension()));
        match ctx.format {
            OutputFormat::Tsv => {
                let mut w = BufWriter::new(File::create(&path)?);
                est.write_tsv(&mut w)?;
                w.flush()?;
            }
            OutputFormat::Json => {
                let mut t = Table::new(["segment_id", "target_lang", "system_id", "score"]);
                for (key, v) in est.scores.iter() {
                    let wild = |s: Option<String>| s.map(Cell::Str).unwrap_or(Cell::Na);
                    t.push(vec![
                        Cell::Str(key.segment_id),
                        wild(key.target_lang),
                        wild(key.system_id),
                        Cell::Float(v, 17),
                    ]);
                }
                t.write(&dir, &est.name, OutputFormat::Json)?;
            }
        }
        println!("{}\t{} scores\t{}", est.name, est.scores.len(), path.display());
        outputs.push(path);
        for d in &est.diagnostics {
            diagnostics.push(vec![Cell::str(&est.name), Cell::str(d)]);
        }
    }
    outputs.push(diagnostics.write(&dir, "diagnostics", ctx.format)?);
    finish(&dir, &mut manifest, &outputs)
}
