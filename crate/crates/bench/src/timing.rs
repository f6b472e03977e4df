//! Latency sweeps across corpus sizes. Each size gets its own seeded
//! corpus and query sample; per-stage wall times come from the pipeline's
//! own instrumentation, summarized by medians, and growth exponents are
//! least-squares slopes in log-log space. Queries run strictly one at a
//! time so measurements are not disturbed by thread scheduling.

use serde::Serialize;

use tmr_core::pipeline::{retrieve_timed, RetrievalRequest, StageTimings};
use tmr_core::{Error, IndexBundle, Ratio, Result, RetrievalConfig};

use crate::synth::{generate_corpus, perturbed_queries, SyntheticSpec};
use crate::table;

/// Median per-query stage latencies (µs) at one corpus size.
#[derive(Debug, Clone, Serialize)]
pub struct SizeTimings {
    pub units: usize,
    pub queries: usize,
    pub domain_us: f64,
    pub filter_us: f64,
    pub rank_us: f64,
    pub select_us: f64,
    pub total_us: f64,
}

/// Fitted growth exponents: slope of ln(median µs) against ln(corpus
/// size). 1.0 means linear scaling, 0.0 means size-independent.
#[derive(Debug, Clone, Serialize)]
pub struct StageExponents {
    pub filter: f64,
    pub rank: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingTable {
    pub rows: Vec<SizeTimings>,
    pub exponents: StageExponents,
}

fn median_us(mut values: Vec<u64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_unstable();
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid] as f64
    } else {
        (values[mid - 1] + values[mid]) as f64 / 2.0
    }
}

/// Least-squares slope of ln(y) on ln(x). Medians below the 1 µs clock
/// resolution are floored so the logarithm stays finite; a stage that
/// cheap contributes a flat segment rather than a singularity.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let lx = x.ln();
        let ly = y.max(1.0).ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Measures one configuration over corpora of the given sizes. Each size
/// reuses `base` with `units` overridden; queries are perturbed samples of
/// that size's own corpus. Requires at least three sizes spanning two
/// orders of magnitude, else a fitted exponent would be meaningless.
pub fn timing_sweep(
    base: &SyntheticSpec,
    sizes: &[usize],
    queries_per_size: usize,
    mutation: f64,
    config: &RetrievalConfig,
    prune: Ratio,
) -> Result<TimingTable> {
    if sizes.len() < 3 {
        return Err(Error::Config("timing sweep needs at least 3 corpus sizes".into()));
    }
    let (min, max) = (
        *sizes.iter().min().expect("nonempty"),
        *sizes.iter().max().expect("nonempty"),
    );
    if min == 0 || max / min < 100 {
        return Err(Error::Config(
            "timing sweep sizes must span at least two orders of magnitude".into(),
        ));
    }
    if queries_per_size == 0 {
        return Err(Error::Config("timing sweep needs at least one query per size".into()));
    }
    config.validate()?;

    let mut rows = Vec::with_capacity(sizes.len());
    for &units in sizes {
        let spec = SyntheticSpec { units, ..base.clone() };
        let bundle = IndexBundle::build(generate_corpus(&spec)?, prune);
        let queries = perturbed_queries(
            bundle.memory(),
            queries_per_size,
            mutation,
            base.seed ^ units as u64,
        )?;
        let mut stages: Vec<StageTimings> = Vec::with_capacity(queries.len());
        for q in &queries {
            let request = RetrievalRequest {
                sentence: bundle.memory().tokenize_query(&q.text),
                domain: q.domain.clone(),
                exclude_uid: q.exclude_uid,
            };
            let (_, timing) = retrieve_timed(&bundle, &request, config)?;
            stages.push(timing);
        }
        rows.push(SizeTimings {
            units,
            queries: stages.len(),
            domain_us: median_us(stages.iter().map(|t| t.domain_us).collect()),
            filter_us: median_us(stages.iter().map(|t| t.filter_us).collect()),
            rank_us: median_us(stages.iter().map(|t| t.rank_us).collect()),
            select_us: median_us(stages.iter().map(|t| t.select_us).collect()),
            total_us: median_us(stages.iter().map(|t| t.total_us()).collect()),
        });
    }
    let points = |pick: fn(&SizeTimings) -> f64| -> Vec<(f64, f64)> {
        rows.iter().map(|r| (r.units as f64, pick(r))).collect()
    };
    let exponents = StageExponents {
        filter: log_log_slope(&points(|r| r.filter_us)),
        rank: log_log_slope(&points(|r| r.rank_us)),
        total: log_log_slope(&points(|r| r.total_us)),
    };
    Ok(TimingTable { rows, exponents })
}

impl TimingTable {
    pub fn render_text(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.units.to_string(),
                    r.queries.to_string(),
                    format!("{:.1}", r.domain_us),
                    format!("{:.1}", r.filter_us),
                    format!("{:.1}", r.rank_us),
                    format!("{:.1}", r.select_us),
                    format!("{:.1}", r.total_us),
                ]
            })
            .collect();
        let mut text = table::aligned(
            &["units", "queries", "domain-us", "filter-us", "rank-us", "select-us", "total-us"],
            &rows,
        );
        text.push_str(&format!(
            "\nexponents: filter={:.3} rank={:.3} total={:.3}\n",
            self.exponents.filter, self.exponents.rank, self.exponents.total
        ));
        text
    }
}
