//! `tmr prompts`: expand a retrieval run into few-shot prompt records.
//!
//! Each retrieved example becomes one block
//! `[SRC]: example source. =[TRG]: example target`, blocks are stacked in
//! match order, and the prompt ends with the unfilled query block
//! `[SRC]: query. =[TRG]:` for a downstream model to complete. One JSON
//! record per query keeps the newline-heavy prompt machine-readable and
//! lets a record say explicitly that it came up short of the requested
//! shot count.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use tmr_core::{Error, Result};

use crate::record::{self, QueryRecord};

#[derive(Args)]
pub struct PromptsArgs {
    /// Match records produced by `tmr retrieve`.
    #[arg(long)]
    matches: PathBuf,

    /// In-context examples per prompt.
    #[arg(long, default_value = "3")]
    shots: usize,

    /// Source-language tag inside the template.
    #[arg(long, default_value = "src")]
    src_tag: String,

    /// Target-language tag inside the template.
    #[arg(long, default_value = "trg")]
    trg_tag: String,
}

/// Frozen template expansion shared with `retrieve --format prompts`.
pub fn render_prompt(rec: &QueryRecord, shots: usize, src_tag: &str, trg_tag: &str) -> String {
    let mut text = String::new();
    for m in rec.matches.iter().take(shots) {
        text.push_str(&format!(
            "[{src_tag}]: {}. =[{trg_tag}]: {}\n",
            m.source, m.target
        ));
    }
    text.push_str(&format!("[{src_tag}]: {}. =[{trg_tag}]:", rec.query));
    text
}

pub fn write_prompt_record(
    rec: &QueryRecord,
    shots: usize,
    src_tag: &str,
    trg_tag: &str,
    out: &mut impl Write,
) -> std::io::Result<()> {
    let used = rec.matches.len().min(shots);
    let prompt = render_prompt(rec, shots, src_tag, trg_tag);
    writeln!(
        out,
        "{{\"prompt\":{},\"examples\":{used},\"short\":{}}}",
        serde_json::to_string(&prompt).expect("plain string serialization cannot fail"),
        rec.matches.len() < shots,
    )
}

pub fn run(args: PromptsArgs) -> Result<()> {
    let records = record::load_records(&args.matches)?;
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    for rec in &records {
        write_prompt_record(rec, args.shots, &args.src_tag, &args.trg_tag, &mut out)
            .map_err(|e| Error::io("<stdout>", e))?;
    }
    Write::flush(&mut out).map_err(|e| Error::io("<stdout>", e))
}
