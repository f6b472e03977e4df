//! `tmr metrics`: score a retrieval run against its query file.
//!
//! Match records and queries are joined by line position (and cross-checked
//! by query text, so a shuffled or truncated file is rejected instead of
//! silently scored). Output is one compact JSON line holding both metric
//! variants, a blank line, then an aligned per-domain table.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use tmr_core::{
    quality_report, Error, QualityReport, QualityVariant, Result, RetrievalSample, Vocabulary,
};

use crate::record::{self, QueryRecord};
use crate::{queries, TokenizerArg};

#[derive(Args)]
pub struct MetricsArgs {
    /// Match records produced by `tmr retrieve`.
    #[arg(long)]
    matches: PathBuf,

    /// The query file the run was made from.
    #[arg(long)]
    queries: PathBuf,

    /// Must match the tokenizer the index was built with.
    #[arg(long, value_enum, default_value = "whitespace")]
    tokenizer: TokenizerArg,

    #[arg(long)]
    lowercase: bool,
}

#[derive(Serialize)]
struct CombinedReport<'a> {
    bow: &'a QualityReport,
    modified: &'a QualityReport,
}

fn build_samples(records: &[QueryRecord], args: &MetricsArgs) -> Vec<RetrievalSample> {
    let config = args.tokenizer.config(args.lowercase);
    // One shared vocabulary, interning as it goes: metric comparisons only
    // need token identity to be consistent across a query and its examples,
    // and interning avoids distinct unknown terms collapsing into one id.
    let mut vocab = Vocabulary::new();
    records
        .iter()
        .map(|rec| RetrievalSample {
            domain: rec.domain.clone().unwrap_or_default(),
            query: vocab.intern_sentence(&rec.query, &config),
            examples: rec
                .matches
                .iter()
                .map(|m| vocab.intern_sentence(&m.source, &config))
                .collect(),
        })
        .collect()
}

fn write_table(
    out: &mut impl Write,
    bow: &QualityReport,
    modified: &QualityReport,
) -> std::io::Result<()> {
    let mut rows: Vec<(String, usize, f64, f64, f64, f64, f64)> = Vec::new();
    for (b, m) in bow.per_domain.iter().zip(&modified.per_domain) {
        let label = if b.domain.is_empty() { "-" } else { &b.domain };
        rows.push((
            label.to_string(),
            b.n_queries,
            b.coverage,
            m.coverage,
            b.relevance,
            m.relevance,
            b.mean_example_length,
        ));
    }
    rows.push((
        "macro".to_string(),
        bow.n_queries,
        bow.coverage,
        modified.coverage,
        bow.relevance,
        modified.relevance,
        bow.mean_example_length,
    ));

    let width = rows
        .iter()
        .map(|r| r.0.len())
        .chain(std::iter::once("domain".len()))
        .max()
        .unwrap_or(6);
    writeln!(
        out,
        "{:<width$}  {:>7}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}",
        "domain", "queries", "cov-bow", "cov-mod", "rel-bow", "rel-mod", "length",
    )?;
    for (label, n, cb, cm, rb, rm, len) in rows {
        writeln!(
            out,
            "{label:<width$}  {n:>7}  {cb:>8.4}  {cm:>8.4}  {rb:>8.4}  {rm:>8.4}  {len:>8.2}",
        )?;
    }
    Ok(())
}

pub fn run(args: MetricsArgs) -> Result<()> {
    let records = record::load_records(&args.matches)?;
    let query_lines = queries::load_queries(&args.queries)?;
    if records.len() != query_lines.len() {
        return Err(Error::CorpusShape(format!(
            "matches hold {} record(s) but the query file has {} line(s)",
            records.len(),
            query_lines.len()
        )));
    }
    for (i, (rec, line)) in records.iter().zip(&query_lines).enumerate() {
        if rec.query != line.text {
            return Err(Error::CorpusShape(format!(
                "record {} does not correspond to query line {}: `{}` vs `{}`",
                i + 1,
                i + 1,
                rec.query,
                line.text
            )));
        }
    }

    let samples = build_samples(&records, &args);
    let bow = quality_report(&samples, QualityVariant::Bow);
    let modified = quality_report(&samples, QualityVariant::Modified);

    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let io_err = |e: std::io::Error| Error::io("<stdout>", e);
    let json = serde_json::to_string(&CombinedReport {
        bow: &bow,
        modified: &modified,
    })
    .expect("report serialization cannot fail");
    writeln!(out, "{json}").map_err(io_err)?;
    writeln!(out).map_err(io_err)?;
    write_table(&mut out, &bow, &modified).map_err(io_err)?;
    out.flush().map_err(io_err)
}
