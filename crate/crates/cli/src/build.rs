//! `tmr build`: ingest parallel corpora, freeze the memory, build the
//! suffix-array and inverted indexes, persist the container.

use std::path::PathBuf;

use clap::Args;
use tmr_core::{Error, IndexBundle, Ratio, Result, TmBuilder};

use crate::{ratio_flag, TokenizerArg};

#[derive(Args)]
pub struct BuildArgs {
    /// Parallel corpus: SOURCE and TARGET are aligned one-sentence-per-line
    /// files, DOMAIN is the label stored on every pair. Repeatable.
    #[arg(long, num_args = 3, value_names = ["SOURCE", "TARGET", "DOMAIN"], action = clap::ArgAction::Append)]
    corpus: Vec<String>,

    /// Tab-separated corpus: FILE holds source<TAB>target rows. Repeatable.
    #[arg(long, num_args = 2, value_names = ["FILE", "DOMAIN"], action = clap::ArgAction::Append)]
    tsv: Vec<String>,

    /// Where to write the index container.
    #[arg(long)]
    out: PathBuf,

    /// Prune index terms present in more than this percentage of segments.
    #[arg(long, default_value = "2", value_parser = ratio_flag)]
    prune: Ratio,

    #[arg(long, value_enum, default_value = "whitespace")]
    tokenizer: TokenizerArg,

    /// Lowercase text before interning.
    #[arg(long)]
    lowercase: bool,
}

pub fn run(args: BuildArgs) -> Result<()> {
    if args.corpus.is_empty() && args.tsv.is_empty() {
        return Err(Error::Config(
            "build needs at least one --corpus or --tsv".into(),
        ));
    }

    let mut builder = TmBuilder::new(args.tokenizer.config(args.lowercase));
    let mut added = 0usize;
    let mut skipped = 0usize;
    for chunk in args.corpus.chunks_exact(3) {
        let stats = builder.add_parallel_files(
            chunk[0].as_ref(),
            chunk[1].as_ref(),
            &chunk[2],
        )?;
        added += stats.added;
        skipped += stats.skipped_empty;
    }
    for chunk in args.tsv.chunks_exact(2) {
        let stats = builder.add_tsv_file(chunk[0].as_ref(), &chunk[1])?;
        added += stats.added;
        skipped += stats.skipped_empty;
    }

    let memory = builder.freeze();
    if skipped > 0 {
        eprintln!("tmr: skipped {skipped} pair(s) with an empty side");
    }

    let mean_src = memory.mean_source_len();
    let mean_trg = if memory.is_empty() {
        0.0
    } else {
        memory.units().iter().map(|u| u.target().len()).sum::<usize>() as f64
            / memory.len() as f64
    };
    let domains = memory.domains().to_vec();

    println!("units: {added}");
    println!("domains: {} ({})", domains.len(), domains.join(", "));
    println!("mean source tokens: {mean_src:.2}");
    println!("mean target tokens: {mean_trg:.2}");
    println!("vocabulary terms: {}", memory.vocabulary().len());

    let bundle = IndexBundle::build(memory, args.prune);
    bundle.save(&args.out)?;
    let bytes = std::fs::metadata(&args.out)
        .map_err(|e| Error::io(&args.out, e))?
        .len();
    println!("index: {} ({bytes} bytes)", args.out.display());
    Ok(())
}
