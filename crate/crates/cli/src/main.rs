//! `tmr` — build, query and measure translation-memory fuzzy-match indexes.
//!
//! Subcommands: `build` (ingest parallel corpora into a persistent index),
//! `retrieve` (batch fuzzy-match queries to JSONL/TSV/prompt records),
//! `metrics` (coverage/relevance/length report over a retrieval run),
//! `prompts` (few-shot prompt records from a retrieval run) and `density`
//! (corpus repetitiveness).
//!
//! Everything written to stdout is byte-deterministic for fixed inputs and
//! flags, independent of thread count; diagnostics and `--timing` lines go
//! to stderr. Exit codes: 0 success, 2 input/config error, 3 unreadable or
//! corrupt index file.

mod build;
mod density;
mod metrics;
mod prompts;
mod queries;
mod record;
mod retrieve;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tmr_core::{Error, Ratio, TokenizerConfig, TokenizerMode};

#[derive(Parser)]
#[command(name = "tmr", version, about = "Translation-memory fuzzy-match retrieval")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest parallel corpora and write a persistent retrieval index.
    Build(build::BuildArgs),
    /// Run a batch of queries against an index and emit match records.
    Retrieve(retrieve::RetrieveArgs),
    /// Score a retrieval run: coverage, relevance and example length.
    Metrics(metrics::MetricsArgs),
    /// Turn a retrieval run into few-shot prompt records.
    Prompts(prompts::PromptsArgs),
    /// Measure corpus repetitiveness from a similarity graph.
    Density(density::DensityArgs),
}

/// Tokenizer selector shared by the subcommands that read raw text.
#[derive(Clone, Copy, ValueEnum)]
pub enum TokenizerArg {
    /// Split on whitespace runs (for pre-tokenized text).
    Whitespace,
    /// Split on whitespace and break punctuation into separate tokens.
    Punctuation,
}

impl TokenizerArg {
    pub fn config(self, lowercase: bool) -> TokenizerConfig {
        let mode = match self {
            TokenizerArg::Whitespace => TokenizerMode::Whitespace,
            TokenizerArg::Punctuation => TokenizerMode::Punctuation,
        };
        TokenizerConfig::new(mode, lowercase)
    }
}

/// Clamp the global worker pool when `TMR_THREADS` is set. Must run before
/// the first parallel operation; the default pool is used otherwise.
fn init_thread_pool() -> Result<(), Error> {
    let Ok(raw) = std::env::var("TMR_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Config(format!("TMR_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Build(args) => build::run(args),
        Command::Retrieve(args) => retrieve::run(args),
        Command::Metrics(args) => metrics::run(args),
        Command::Prompts(args) => prompts::run(args),
        Command::Density(args) => density::run(args),
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::IndexFormat(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(err) = init_thread_pool() {
        eprintln!("tmr: {err}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("tmr: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Parse a decimal flag into an exact fraction early, so bad values fail
/// at argument-parsing time with the flag name attached.
pub fn ratio_flag(s: &str) -> Result<Ratio, String> {
    s.parse::<Ratio>().map_err(|e| e.to_string())
}
