//! `tmr density`: similarity-graph repetitiveness of a one-sentence-per-line
//! corpus. Empty lines are skipped (they cannot carry similarity edges) and
//! counted on stderr.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use tmr_core::{density, DensityMode, Error, Ratio, Result, Sentence, Vocabulary};

use crate::{ratio_flag, TokenizerArg};

#[derive(Args)]
pub struct DensityArgs {
    /// Text file, one sentence per line (source side of a memory).
    #[arg(long)]
    corpus: PathBuf,

    /// Similarity a pair must strictly exceed to be linked.
    #[arg(long, default_value = "0.4", value_parser = ratio_flag)]
    threshold: Ratio,

    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,

    #[arg(long, value_enum, default_value = "whitespace")]
    tokenizer: TokenizerArg,

    #[arg(long)]
    lowercase: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Check every pair.
    Exact,
    /// Only check pairs sharing at least one token (no edge can be missed;
    /// far fewer pairs on natural corpora).
    Prefiltered,
    /// Exact up to 50k sentences, prefiltered beyond.
    Auto,
}

pub fn run(args: DensityArgs) -> Result<()> {
    let raw = std::fs::read_to_string(&args.corpus).map_err(|e| Error::io(&args.corpus, e))?;
    let config = args.tokenizer.config(args.lowercase);
    let mut vocab = Vocabulary::new();
    let mut skipped = 0usize;
    let sentences: Vec<Sentence> = raw
        .lines()
        .filter_map(|line| {
            let s = vocab.intern_sentence(line, &config);
            if s.is_empty() {
                skipped += 1;
                None
            } else {
                Some(s)
            }
        })
        .collect();
    if skipped > 0 {
        eprintln!("tmr: skipped {skipped} empty line(s)");
    }

    let mode = match args.mode {
        ModeArg::Exact => DensityMode::Exact,
        ModeArg::Prefiltered => DensityMode::Prefiltered,
        ModeArg::Auto => DensityMode::Auto,
    };
    let refs: Vec<&Sentence> = sentences.iter().collect();
    let result = density(&refs, args.threshold, mode);
    if result.degenerate {
        eprintln!("tmr: fewer than 2 sentences; density is 1 by definition");
    }

    println!("sentences: {}", result.corpus_size);
    println!("ncc: {}", result.ncc);
    println!("density: {:.2}%", result.density * 100.0);
    println!("threshold: {}", result.threshold.to_f64());
    println!(
        "mode: {}",
        if result.prefiltered { "prefiltered" } else { "exact" }
    );
    Ok(())
}
