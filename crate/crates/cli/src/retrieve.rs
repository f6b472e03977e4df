//! `tmr retrieve`: load an index, run a batch of queries through the
//! configured pipeline, and stream one record per query in input order.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use tmr_core::{
    retrieve_batch, retrieve_timed, Candidate, DomainPolicy, EditCosts, Error, FilterSpec,
    IndexBundle, Ratio, RankerSpec, Result, RetrievalConfig, RetrievalRequest, RetrievedSet,
    StageTimings,
};

use crate::record::{MatchRow, QueryRecord};
use crate::{prompts, queries, ratio_flag};

#[derive(Args)]
pub struct RetrieveArgs {
    /// Index container written by `tmr build`.
    #[arg(long)]
    index: PathBuf,

    /// Query file: one query per line, optionally `query<TAB>domain`.
    #[arg(long)]
    queries: PathBuf,

    /// Which part of the memory each query may match.
    #[arg(long, value_enum, default_value = "all")]
    domain_policy: PolicyArg,

    /// Domain label for queries that carry none in the file.
    #[arg(long)]
    query_domain: Option<String>,

    #[arg(long, value_enum, default_value = "none")]
    filter: FilterArg,

    /// NGM length threshold relative to the query (survivors need a shared
    /// n-gram of at least τ·|q| tokens).
    #[arg(long, default_value = "0.3", value_parser = ratio_flag)]
    tau: Ratio,

    /// NGM absolute minimum shared n-gram length.
    #[arg(long, default_value = "3")]
    min_len: u32,

    /// BM25 filter candidate cap.
    #[arg(long, default_value = "100")]
    cap: usize,

    #[arg(long, value_enum, default_value = "led")]
    ranker: RankerArg,

    /// Deletion cost for the delta-lcs ranker.
    #[arg(long, default_value = "0.1", value_parser = ratio_flag)]
    delta: Ratio,

    /// Contrastive selection strength α (0 = plain top-k; 0.3 is the
    /// conventional setting). Off when the flag is absent.
    #[arg(long)]
    contrast: Option<f64>,

    /// Matches to keep per query.
    #[arg(long, default_value = "3")]
    k: usize,

    /// Drop the unit whose uid equals the query's line index
    /// (leave-one-out when querying the memory with its own source side).
    #[arg(long)]
    exclude_self: bool,

    #[arg(long, value_enum, default_value = "jsonl")]
    format: FormatArg,

    /// Source-language tag for `--format prompts`.
    #[arg(long, default_value = "src")]
    src_tag: String,

    /// Target-language tag for `--format prompts`.
    #[arg(long, default_value = "trg")]
    trg_tag: String,

    /// Print accumulated per-stage microseconds to stderr (queries are
    /// processed sequentially so stage clocks do not overlap).
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    All,
    InDomain,
    OutOfDomain,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    None,
    Ngm,
    Bm25,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankerArg {
    Led,
    Lcs,
    DeltaLcs,
    Bm25,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Tsv,
    Prompts,
}

fn pipeline_config(args: &RetrieveArgs) -> Result<RetrievalConfig> {
    let domain = match args.domain_policy {
        PolicyArg::All => DomainPolicy::All,
        PolicyArg::InDomain => DomainPolicy::InDomain,
        PolicyArg::OutOfDomain => DomainPolicy::OutOfDomain,
    };
    let filter = match args.filter {
        FilterArg::None => FilterSpec::None,
        FilterArg::Ngm => FilterSpec::Ngm {
            tau: args.tau,
            min_len: args.min_len,
        },
        FilterArg::Bm25 => FilterSpec::Bm25 { cap: args.cap },
    };
    let ranker = match args.ranker {
        RankerArg::Led => RankerSpec::Edit(EditCosts::led()),
        RankerArg::Lcs => RankerSpec::Edit(EditCosts::lcs()),
        RankerArg::DeltaLcs => RankerSpec::Edit(EditCosts::delta_lcs(args.delta)?),
        RankerArg::Bm25 => RankerSpec::Bm25,
    };
    let config = RetrievalConfig {
        domain,
        filter,
        ranker,
        contrast: args.contrast,
        k: args.k,
    };
    config.validate()?;
    Ok(config)
}

fn to_record(
    bundle: &IndexBundle,
    query: &queries::QueryLine,
    domain: Option<&str>,
    set: &RetrievedSet,
) -> QueryRecord {
    let memory = bundle.memory();
    let matches = set
        .matches
        .iter()
        .map(|c: &Candidate| MatchRow {
            uid: c.uid,
            source: memory.source_text(c.uid),
            target: memory.target_text(c.uid),
            base_score: c.base_score,
            adjusted_score: c.adjusted_score,
        })
        .collect();
    QueryRecord {
        query: query.text.clone(),
        domain: domain.map(str::to_string),
        matches,
        exhausted: set.exhausted,
    }
}

pub fn run(args: RetrieveArgs) -> Result<()> {
    let bundle = IndexBundle::load(&args.index)?;
    let lines = queries::load_queries(&args.queries)?;
    let config = pipeline_config(&args)?;

    let requests: Vec<RetrievalRequest> = lines
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let mut req = RetrievalRequest::new(bundle.memory().tokenize_query(&q.text));
            req.domain = q
                .domain
                .clone()
                .or_else(|| args.query_domain.clone());
            if args.exclude_self {
                req.exclude_uid = Some(i as u32);
            }
            req
        })
        .collect();

    let sets = if args.timing {
        let mut total = StageTimings::default();
        let mut sets = Vec::with_capacity(requests.len());
        for req in &requests {
            let (set, timings) = retrieve_timed(&bundle, req, &config)?;
            total.accumulate(&timings);
            sets.push(set);
        }
        eprintln!(
            "timing: queries={} domain={}us filter={}us rank={}us select={}us total={}us",
            requests.len(),
            total.domain_us,
            total.filter_us,
            total.rank_us,
            total.select_us,
            total.total_us(),
        );
        sets
    } else {
        retrieve_batch(&bundle, &requests, &config)?
    };

    let records: Vec<QueryRecord> = lines
        .iter()
        .zip(&requests)
        .zip(&sets)
        .map(|((line, req), set)| to_record(&bundle, line, req.domain.as_deref(), set))
        .collect();

    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let io_err = |e: std::io::Error| Error::io("<stdout>", e);
    match args.format {
        FormatArg::Jsonl => {
            for rec in &records {
                rec.write_jsonl(&mut out).map_err(io_err)?;
            }
        }
        FormatArg::Tsv => write_tsv(&records, &mut out).map_err(io_err)?,
        FormatArg::Prompts => {
            for rec in &records {
                prompts::write_prompt_record(rec, args.k, &args.src_tag, &args.trg_tag, &mut out)
                    .map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)
}

/// Flat export: one match per row. Queries with no matches produce no rows.
fn write_tsv(records: &[QueryRecord], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "query_id\tquery\tdomain\trank\tuid\tsource\ttarget\tbase_score\tadjusted_score"
    )?;
    for (qid, rec) in records.iter().enumerate() {
        for (rank, m) in rec.matches.iter().enumerate() {
            writeln!(
                out,
                "{qid}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}",
                rec.query,
                rec.domain.as_deref().unwrap_or(""),
                rank + 1,
                m.uid,
                m.source,
                m.target,
                m.base_score,
                m.adjusted_score,
            )?;
        }
    }
    Ok(())
}
