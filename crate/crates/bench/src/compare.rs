//! Side-by-side retrieval-strategy comparison on one memory: quality
//! aggregates per configuration plus the distribution of n-gram-filter
//! survivor counts across a threshold grid.

use serde::Serialize;

use tmr_core::metrics::{quality_report, QualityVariant, RetrievalSample};
use tmr_core::pipeline::{ngm_filter, retrieve_batch, DomainUniverse, RetrievalRequest};
use tmr_core::{Error, IndexBundle, Ratio, Result, RetrievalConfig};

use crate::synth::BenchQuery;
use crate::table;

/// Quality aggregates for one named configuration, macro-averaged across
/// domains under both overlap variants.
#[derive(Debug, Clone, Serialize)]
pub struct StrategyOutcome {
    pub name: String,
    pub coverage_bow: f64,
    pub coverage_modified: f64,
    pub relevance_bow: f64,
    pub relevance_modified: f64,
    pub mean_length: f64,
    pub n_queries: usize,
}

/// Five-number summary of filter survivor counts at one threshold.
#[derive(Debug, Clone, Serialize)]
pub struct Quartiles {
    pub tau: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Full output of one comparison experiment.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub strategies: Vec<StrategyOutcome>,
    pub survivors: Vec<Quartiles>,
}

/// Runs every configuration over the same queries and reports quality
/// aggregates side by side. All configurations must share `k`, otherwise
/// mean lengths and coverages would not be comparable.
pub fn compare_strategies(
    bundle: &IndexBundle,
    queries: &[BenchQuery],
    configs: &[(String, RetrievalConfig)],
) -> Result<Vec<StrategyOutcome>> {
    let Some(((_, first), rest)) = configs.split_first() else {
        return Err(Error::Config("no configurations to compare".into()));
    };
    if rest.iter().any(|(_, c)| c.k != first.k) {
        return Err(Error::Config("compared configurations must share k".into()));
    }
    let requests: Vec<RetrievalRequest> = queries
        .iter()
        .map(|q| RetrievalRequest {
            sentence: bundle.memory().tokenize_query(&q.text),
            domain: q.domain.clone(),
            exclude_uid: q.exclude_uid,
        })
        .collect();
    let mut out = Vec::with_capacity(configs.len());
    for (name, config) in configs {
        let sets = retrieve_batch(bundle, &requests, config)?;
        let samples: Vec<RetrievalSample> = requests
            .iter()
            .zip(&sets)
            .map(|(req, set)| RetrievalSample {
                domain: req.domain.clone().unwrap_or_default(),
                query: req.sentence.clone(),
                examples: set
                    .matches
                    .iter()
                    .map(|c| bundle.memory().unit(c.uid).source().clone())
                    .collect(),
            })
            .collect();
        let bow = quality_report(&samples, QualityVariant::Bow);
        let modified = quality_report(&samples, QualityVariant::Modified);
        out.push(StrategyOutcome {
            name: name.clone(),
            coverage_bow: bow.coverage,
            coverage_modified: modified.coverage,
            relevance_bow: bow.relevance,
            relevance_modified: modified.relevance,
            mean_length: bow.mean_example_length,
            n_queries: bow.n_queries,
        });
    }
    Ok(out)
}

/// Linear-interpolation quantile of an ascending slice.
fn quantile(sorted: &[u32], p: f64) -> f64 {
    match sorted {
        [] => 0.0,
        [only] => *only as f64,
        _ => {
            let h = p * (sorted.len() - 1) as f64;
            let lo = h.floor() as usize;
            let frac = h - lo as f64;
            let a = sorted[lo] as f64;
            let b = sorted[(lo + 1).min(sorted.len() - 1)] as f64;
            a + (b - a) * frac
        }
    }
}

/// For each threshold, counts per query how many memory units survive the
/// shared-n-gram filter over the whole memory, and summarizes the counts.
/// Per-query counts are non-increasing in the threshold, so every summary
/// statistic is too.
pub fn survivor_quartiles(
    bundle: &IndexBundle,
    queries: &[BenchQuery],
    taus: &[Ratio],
    min_len: u32,
) -> Vec<Quartiles> {
    let universe = DomainUniverse::All(bundle.memory().len() as u32);
    let sentences: Vec<_> = queries
        .iter()
        .map(|q| bundle.memory().tokenize_query(&q.text))
        .collect();
    taus.iter()
        .map(|&tau| {
            let mut counts: Vec<u32> = sentences
                .iter()
                .map(|s| ngm_filter(bundle.suffix(), s, tau, min_len, &universe).len() as u32)
                .collect();
            counts.sort_unstable();
            Quartiles {
                tau: tau.to_f64(),
                min: quantile(&counts, 0.0),
                q1: quantile(&counts, 0.25),
                median: quantile(&counts, 0.5),
                q3: quantile(&counts, 0.75),
                max: quantile(&counts, 1.0),
            }
        })
        .collect()
}

impl Comparison {
    /// Aligned tables: one row per strategy, then one per threshold.
    pub fn render_text(&self) -> String {
        let strategy_rows: Vec<Vec<String>> = self
            .strategies
            .iter()
            .map(|s| {
                vec![
                    s.name.clone(),
                    format!("{:.4}", s.coverage_bow),
                    format!("{:.4}", s.coverage_modified),
                    format!("{:.4}", s.relevance_bow),
                    format!("{:.4}", s.relevance_modified),
                    format!("{:.2}", s.mean_length),
                ]
            })
            .collect();
        let mut text = table::aligned(
            &["strategy", "cov-bow", "cov-mod", "rel-bow", "rel-mod", "length"],
            &strategy_rows,
        );
        if !self.survivors.is_empty() {
            let survivor_rows: Vec<Vec<String>> = self
                .survivors
                .iter()
                .map(|q| {
                    vec![
                        format!("{:.2}", q.tau),
                        format!("{:.1}", q.min),
                        format!("{:.1}", q.q1),
                        format!("{:.1}", q.median),
                        format!("{:.1}", q.q3),
                        format!("{:.1}", q.max),
                    ]
                })
                .collect();
            text.push('\n');
            text.push_str(&table::aligned(
                &["tau", "min", "q1", "median", "q3", "max"],
                &survivor_rows,
            ));
        }
        text
    }
}
