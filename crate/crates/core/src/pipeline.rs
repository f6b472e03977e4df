//! The retrieval pipeline: domain selection → candidate filtering →
//! ranking → diversity-aware (or plain) top-k selection.
//!
//! Every stage is exposed on its own so callers can time or test them
//! independently; [`retrieve`] composes them for one query and
//! [`retrieve_batch`] fans a query list out across threads with
//! order-preserving, bit-reproducible output.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::corpus::TranslationMemory;
use crate::edit::{
    dp_delta_scaled, led_similarity, normalizer_scaled, similarity_scaled, EditCosts,
};
use crate::error::{Error, Result};
use crate::index::{IndexBundle, SuffixArrayIndex};
use crate::ratio::Ratio;
use crate::text::Sentence;

/// Which slice of the memory a query may draw candidates from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainPolicy {
    /// The whole memory.
    All,
    /// Only units tagged with the query's own domain.
    InDomain,
    /// Everything except the query's domain.
    OutOfDomain,
}

/// Candidate filter applied before ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterSpec {
    /// No filtering; rank the whole selected universe.
    None,
    /// Keep units sharing a contiguous n-gram with the query of length
    /// ≥ `min_len` and ≥ `tau · |query|`.
    Ngm { tau: Ratio, min_len: u32 },
    /// Keep the `cap` best BM25 candidates from the inverted index.
    Bm25 { cap: usize },
}

/// Scoring function for the ranking stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankerSpec {
    /// Weighted edit-distance similarity of example source vs. query.
    Edit(EditCosts),
    /// Okapi BM25 over source-side terms.
    Bm25,
}

/// Everything configurable about one retrieval run.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalConfig {
    pub domain: DomainPolicy,
    pub filter: FilterSpec,
    pub ranker: RankerSpec,
    /// Diversity penalty strength α; `None` and `Some(0.0)` both mean
    /// plain top-k.
    pub contrast: Option<f64>,
    /// Maximum number of examples returned per query.
    pub k: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            domain: DomainPolicy::All,
            filter: FilterSpec::None,
            ranker: RankerSpec::Edit(EditCosts::led()),
            contrast: None,
            k: 3,
        }
    }
}

impl RetrievalConfig {
    /// Rejects parameter combinations with no defined behavior.
    pub fn validate(&self) -> Result<()> {
        let config = |msg: &str| Err(Error::Config(msg.into()));
        if self.k == 0 {
            return config("k must be at least 1");
        }
        match &self.filter {
            FilterSpec::Ngm { tau, min_len } => {
                if tau.is_zero() || tau.gt_int(1) {
                    return config("ngm threshold tau must lie in (0, 1]");
                }
                if *min_len == 0 {
                    return config("ngm minimum match length must be at least 1");
                }
            }
            FilterSpec::Bm25 { cap } => {
                if *cap == 0 {
                    return config("bm25 candidate cap must be at least 1");
                }
            }
            FilterSpec::None => {}
        }
        if let Some(alpha) = self.contrast {
            if !alpha.is_finite() || alpha < 0.0 {
                return config("contrast strength must be a finite value ≥ 0");
            }
        }
        Ok(())
    }
}

/// One query of a retrieval batch: the tokenized sentence, the domain
/// label used by in/out-of-domain policies, and an optional unit to
/// exclude (leave-one-out retrieval over the memory itself).
#[derive(Debug, Clone)]
pub struct RetrievalRequest {
    pub sentence: Sentence,
    pub domain: Option<String>,
    pub exclude_uid: Option<u32>,
}

impl RetrievalRequest {
    pub fn new(sentence: Sentence) -> Self {
        RetrievalRequest {
            sentence,
            domain: None,
            exclude_uid: None,
        }
    }
}

/// A scored candidate. `adjusted_score` equals `base_score` until a
/// diversity penalty has been subtracted from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub uid: u32,
    pub base_score: f64,
    pub adjusted_score: f64,
}

/// Final result for one query: at most k candidates, in ranking order
/// (plain mode) or selection order (contrastive mode).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RetrievedSet {
    pub matches: Vec<Candidate>,
    /// True when fewer than k candidates survived selection and filtering.
    pub exhausted: bool,
}

/// Wall-clock microseconds spent in each stage of one retrieval.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub domain_us: u64,
    pub filter_us: u64,
    pub rank_us: u64,
    pub select_us: u64,
}

impl StageTimings {
    pub fn accumulate(&mut self, other: &StageTimings) {
        self.domain_us += other.domain_us;
        self.filter_us += other.filter_us;
        self.rank_us += other.rank_us;
        self.select_us += other.select_us;
    }

    pub fn total_us(&self) -> u64 {
        self.domain_us + self.filter_us + self.rank_us + self.select_us
    }
}

/// The uid universe a domain policy selects. Kept symbolic for the
/// all-domains case so filters never pay O(corpus) per query.
#[derive(Debug)]
pub enum DomainUniverse<'a> {
    All(u32),
    Members(&'a [u32]),
    Complement(Vec<u32>),
}

impl DomainUniverse<'_> {
    pub fn len(&self) -> usize {
        match self {
            DomainUniverse::All(n) => *n as usize,
            DomainUniverse::Members(m) => m.len(),
            DomainUniverse::Complement(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, uid: u32) -> bool {
        match self {
            DomainUniverse::All(n) => uid < *n,
            DomainUniverse::Members(m) => m.binary_search(&uid).is_ok(),
            DomainUniverse::Complement(v) => v.binary_search(&uid).is_ok(),
        }
    }

    /// Uids in ascending order.
    pub fn iter(&self) -> UniverseIter<'_> {
        match self {
            DomainUniverse::All(n) => UniverseIter::Range(0..*n),
            DomainUniverse::Members(m) => UniverseIter::Slice(m.iter()),
            DomainUniverse::Complement(v) => UniverseIter::Slice(v.iter()),
        }
    }
}

#[derive(Debug)]
pub enum UniverseIter<'a> {
    Range(std::ops::Range<u32>),
    Slice(std::slice::Iter<'a, u32>),
}

impl Iterator for UniverseIter<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        match self {
            UniverseIter::Range(r) => r.next(),
            UniverseIter::Slice(s) => s.next().copied(),
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match self {
            UniverseIter::Range(r) => r.size_hint(),
            UniverseIter::Slice(s) => s.size_hint(),
        }
    }
}

/// Resolves a domain policy to a uid universe. In/out-of-domain policies
/// require a query domain label that the memory knows.
pub fn select_domain<'a>(
    memory: &'a TranslationMemory,
    policy: DomainPolicy,
    query_domain: Option<&str>,
) -> Result<DomainUniverse<'a>> {
    if policy == DomainPolicy::All {
        return Ok(DomainUniverse::All(memory.len() as u32));
    }
    let label = query_domain.ok_or_else(|| {
        Error::Config("domain policy requires a query domain label".into())
    })?;
    let id = memory
        .domain_index(label)
        .ok_or_else(|| Error::Config(format!("unknown domain label `{label}`")))?;
    match policy {
        DomainPolicy::InDomain => Ok(DomainUniverse::Members(memory.domain_uids(id))),
        DomainPolicy::OutOfDomain => {
            let uids = memory
                .units()
                .iter()
                .filter(|u| u.domain_id() != id)
                .map(|u| u.uid())
                .collect();
            Ok(DomainUniverse::Complement(uids))
        }
        DomainPolicy::All => unreachable!("handled above"),
    }
}

/// N-gram-match filter: keeps units of `universe` whose longest shared
/// contiguous n-gram `g` with the query satisfies `|g| ≥ min_len` and
/// `|g| ≥ tau · |query|` (compared exactly, no rounding). Returns uids in
/// ascending order.
pub fn ngm_filter(
    index: &SuffixArrayIndex,
    query: &Sentence,
    tau: Ratio,
    min_len: u32,
    universe: &DomainUniverse,
) -> Vec<u32> {
    let shared = index.longest_common_ngram(query, min_len.max(1) as usize);
    let q_len = query.len() as u128;
    let mut out: Vec<u32> = shared
        .into_iter()
        .filter(|&(uid, g)| {
            g as u128 * tau.denom() as u128 >= tau.numer() as u128 * q_len
                && universe.contains(uid)
        })
        .map(|(uid, _)| uid)
        .collect();
    out.sort_unstable();
    out
}

/// Scores `candidates` (uids in ascending order) against the query and
/// returns them sorted by score descending, uid ascending on ties.
/// Candidates sharing no scoreable material get score 0.
pub fn rank(
    bundle: &IndexBundle,
    candidates: &[u32],
    query: &Sentence,
    ranker: &RankerSpec,
) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = match ranker {
        RankerSpec::Edit(costs) => {
            let sc = costs.scaled();
            let q = query.tokens();
            let mut prev = Vec::new();
            let mut cur = Vec::new();
            candidates
                .iter()
                .map(|&uid| {
                    let src = bundle.memory().unit(uid).source();
                    let score = if q.is_empty() || src.is_empty() {
                        0.0
                    } else {
                        let delta = dp_delta_scaled(src.tokens(), q, &sc, &mut prev, &mut cur);
                        let n = normalizer_scaled(src.len(), q.len(), &sc);
                        similarity_scaled(delta, n)
                    };
                    Candidate {
                        uid,
                        base_score: score,
                        adjusted_score: score,
                    }
                })
                .collect()
        }
        RankerSpec::Bm25 => {
            let scores: HashMap<u32, f64> = bundle
                .inverted()
                .bm25_scores_where(query, |uid| candidates.binary_search(&uid).is_ok())
                .into_iter()
                .collect();
            candidates
                .iter()
                .map(|&uid| {
                    let score = scores.get(&uid).copied().unwrap_or(0.0);
                    Candidate {
                        uid,
                        base_score: score,
                        adjusted_score: score,
                    }
                })
                .collect()
        }
    };
    sort_by_score(&mut out);
    out
}

fn sort_by_score(candidates: &mut [Candidate]) {
    candidates.sort_unstable_by(|a, b| {
        b.base_score
            .partial_cmp(&a.base_score)
            .expect("similarity scores are finite")
            .then(a.uid.cmp(&b.uid))
    });
}

fn select_top_k(mut ranked: Vec<Candidate>, k: usize) -> RetrievedSet {
    let exhausted = ranked.len() < k;
    ranked.truncate(k);
    RetrievedSet {
        matches: ranked,
        exhausted,
    }
}

/// How many of the top ranked candidates enter the greedy diversity loop;
/// bounds its quadratic re-scoring.
fn contrast_pool(k: usize) -> usize {
    2 * k.max(20)
}

/// Greedy diversity-aware selection: repeatedly takes the candidate with
/// the best adjusted score, where each remaining candidate's score is its
/// base score minus `alpha / |selected|` times the summed Levenshtein
/// similarity between its source and every already-selected source.
///
/// With `alpha` ≤ 0 this is exactly plain top-k selection. Ties keep the
/// incoming ranking order (score descending, uid ascending).
pub fn contrastive_select(
    memory: &TranslationMemory,
    mut ranked: Vec<Candidate>,
    alpha: f64,
    k: usize,
) -> RetrievedSet {
    if alpha <= 0.0 {
        return select_top_k(ranked, k);
    }
    let exhausted = ranked.len() < k;
    ranked.truncate(contrast_pool(k));
    let sources: Vec<&Sentence> = ranked
        .iter()
        .map(|c| memory.unit(c.uid).source())
        .collect();
    let mut penalty = vec![0.0f64; ranked.len()];
    let mut remaining: Vec<usize> = (0..ranked.len()).collect();
    let mut matches = Vec::with_capacity(k.min(ranked.len()));
    while matches.len() < k && !remaining.is_empty() {
        let scale = match matches.len() {
            0 => 0.0,
            m => alpha / m as f64,
        };
        let mut best_slot = 0;
        let mut best_adjusted = f64::NEG_INFINITY;
        for (slot, &i) in remaining.iter().enumerate() {
            let adjusted = ranked[i].base_score - scale * penalty[i];
            if adjusted > best_adjusted {
                best_adjusted = adjusted;
                best_slot = slot;
            }
        }
        let picked = remaining.remove(best_slot);
        matches.push(Candidate {
            uid: ranked[picked].uid,
            base_score: ranked[picked].base_score,
            adjusted_score: best_adjusted,
        });
        for &i in &remaining {
            penalty[i] += led_similarity(sources[i], sources[picked]);
        }
    }
    RetrievedSet { matches, exhausted }
}

/// Rescales BM25 base scores to [0, 1] by min-max over the candidate
/// list, so the bounded diversity penalty operates on a comparable scale.
/// A list with one distinct score maps to 1.0 everywhere.
fn normalize_bm25_scores(ranked: &mut [Candidate]) {
    let (Some(first), Some(last)) = (ranked.first(), ranked.last()) else {
        return;
    };
    let (max, min) = (first.base_score, last.base_score);
    let span = max - min;
    for c in ranked.iter_mut() {
        let s = if span > 0.0 { (c.base_score - min) / span } else { 1.0 };
        c.base_score = s;
        c.adjusted_score = s;
    }
}

enum Filtered {
    Uids(Vec<u32>),
    Scored(Vec<(u32, f64)>),
}

/// Runs the full pipeline for one query and reports per-stage wall time.
pub fn retrieve_timed(
    bundle: &IndexBundle,
    request: &RetrievalRequest,
    config: &RetrievalConfig,
) -> Result<(RetrievedSet, StageTimings)> {
    config.validate()?;
    let mut timings = StageTimings::default();
    let query = &request.sentence;
    let exclude = request.exclude_uid;

    let clock = Instant::now();
    let universe = select_domain(bundle.memory(), config.domain, request.domain.as_deref())?;
    timings.domain_us = clock.elapsed().as_micros() as u64;

    let clock = Instant::now();
    let filtered = match &config.filter {
        FilterSpec::None => {
            Filtered::Uids(universe.iter().filter(|&u| Some(u) != exclude).collect())
        }
        FilterSpec::Ngm { tau, min_len } => {
            let mut uids = ngm_filter(bundle.suffix(), query, *tau, *min_len, &universe);
            if let Some(e) = exclude {
                uids.retain(|&u| u != e);
            }
            Filtered::Uids(uids)
        }
        FilterSpec::Bm25 { cap } => Filtered::Scored(bundle.inverted().bm25_candidates_where(
            query,
            *cap,
            |uid| universe.contains(uid) && Some(uid) != exclude,
        )),
    };
    timings.filter_us = clock.elapsed().as_micros() as u64;

    let clock = Instant::now();
    let mut ranked = match (&filtered, &config.ranker) {
        // A BM25 filter already carries the exact scores a BM25 ranker
        // would recompute.
        (Filtered::Scored(scored), RankerSpec::Bm25) => scored
            .iter()
            .map(|&(uid, score)| Candidate {
                uid,
                base_score: score,
                adjusted_score: score,
            })
            .collect(),
        (Filtered::Scored(scored), ranker) => {
            let mut uids: Vec<u32> = scored.iter().map(|&(uid, _)| uid).collect();
            uids.sort_unstable();
            rank(bundle, &uids, query, ranker)
        }
        (Filtered::Uids(uids), ranker) => rank(bundle, uids, query, ranker),
    };
    ranked.retain(|c| c.base_score > 0.0);
    timings.rank_us = clock.elapsed().as_micros() as u64;

    let clock = Instant::now();
    let set = match config.contrast {
        Some(alpha) if alpha > 0.0 => {
            if config.ranker == RankerSpec::Bm25 {
                normalize_bm25_scores(&mut ranked);
            }
            contrastive_select(bundle.memory(), ranked, alpha, config.k)
        }
        _ => select_top_k(ranked, config.k),
    };
    timings.select_us = clock.elapsed().as_micros() as u64;
    Ok((set, timings))
}

/// Runs the full pipeline for one query.
pub fn retrieve(
    bundle: &IndexBundle,
    request: &RetrievalRequest,
    config: &RetrievalConfig,
) -> Result<RetrievedSet> {
    retrieve_timed(bundle, request, config).map(|(set, _)| set)
}

/// Retrieves for every request, in input order. Queries are scored in
/// parallel; results do not depend on the thread count.
pub fn retrieve_batch(
    bundle: &IndexBundle,
    requests: &[RetrievalRequest],
    config: &RetrievalConfig,
) -> Result<Vec<RetrievedSet>> {
    config.validate()?;
    if config.domain != DomainPolicy::All {
        for (i, r) in requests.iter().enumerate() {
            let label = r.domain.as_deref().ok_or_else(|| {
                Error::Config(format!("query {}: domain policy requires a domain label", i + 1))
            })?;
            if bundle.memory().domain_index(label).is_none() {
                return Err(Error::Config(format!(
                    "query {}: unknown domain label `{label}`",
                    i + 1
                )));
            }
        }
    }
    requests
        .par_iter()
        .map(|r| retrieve(bundle, r, config))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TmBuilder;
    use crate::text::TokenizerConfig;

    fn bundle_from(pairs: &[(&str, &str)]) -> IndexBundle {
        let mut b = TmBuilder::new(TokenizerConfig::default());
        for (src, domain) in pairs {
            assert!(b.add_pair(src, "tgt", domain));
        }
        IndexBundle::build(b.freeze(), Ratio::from_int(100))
    }

    fn led_config() -> RetrievalConfig {
        RetrievalConfig::default()
    }

    #[test]
    fn domain_selection_counts() {
        let b = bundle_from(&[
            ("a b", "med"),
            ("c d", "med"),
            ("e f", "med"),
            ("g h", "law"),
            ("i j", "law"),
        ]);
        let m = b.memory();
        assert_eq!(
            select_domain(m, DomainPolicy::All, None).unwrap().len(),
            5
        );
        let ind = select_domain(m, DomainPolicy::InDomain, Some("med")).unwrap();
        assert_eq!(ind.iter().collect::<Vec<_>>(), vec![0, 1, 2]);
        let out = select_domain(m, DomainPolicy::OutOfDomain, Some("med")).unwrap();
        assert_eq!(out.iter().collect::<Vec<_>>(), vec![3, 4]);
        assert!(out.contains(3) && !out.contains(0));

        assert!(matches!(
            select_domain(m, DomainPolicy::InDomain, None),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            select_domain(m, DomainPolicy::OutOfDomain, Some("nope")),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn ngm_threshold_arithmetic() {
        // One memory sentence shares exactly the trigram "a b c".
        let b = bundle_from(&[("z a b c w", "d"), ("p q r", "d")]);
        let tau = Ratio::new(3, 10);
        let all = select_domain(b.memory(), DomainPolicy::All, None).unwrap();

        // |q| = 5: need |g| ≥ 1.5 and ≥ 3 → trigram passes.
        let q5 = b.memory().tokenize_query("a b c m n");
        assert_eq!(ngm_filter(b.suffix(), &q5, tau, 3, &all), vec![0]);

        // |q| = 20: need |g| ≥ 6 → the same trigram fails.
        let q20 = b.memory().tokenize_query(
            "a b c m n o p2 q2 r2 s t u v w2 x y z2 aa bb cc",
        );
        assert_eq!(q20.len(), 20);
        assert!(ngm_filter(b.suffix(), &q20, tau, 3, &all).is_empty());
    }

    #[test]
    fn ngm_survivors_grow_as_tau_drops() {
        let b = bundle_from(&[
            ("a b c d e f", "d"),
            ("a b c x y z", "d"),
            ("a b q r s t", "d"),
            ("m n o p q r", "d"),
        ]);
        let q = b.memory().tokenize_query("a b c d e f");
        let all = select_domain(b.memory(), DomainPolicy::All, None).unwrap();
        let mut previous: Option<Vec<u32>> = None;
        for tau in [Ratio::new(5, 10), Ratio::new(4, 10), Ratio::new(3, 10), Ratio::new(2, 10)] {
            let survivors = ngm_filter(b.suffix(), &q, tau, 1, &all);
            if let Some(prev) = &previous {
                assert!(
                    prev.iter().all(|u| survivors.contains(u)),
                    "lowering tau must not drop survivors"
                );
            }
            previous = Some(survivors);
        }
    }

    #[test]
    fn rank_puts_exact_duplicate_first_and_breaks_ties_by_uid() {
        let b = bundle_from(&[
            ("x y z", "d"),
            ("a b c", "d"),
            ("a b c", "d"),
        ]);
        let q = b.memory().tokenize_query("a b c");
        let ranked = rank(&b, &[0, 1, 2], &q, &led_config().ranker);
        assert_eq!(ranked[0].uid, 1);
        assert_eq!(ranked[0].base_score, 1.0);
        assert_eq!(ranked[1].uid, 2);
        assert_eq!(ranked[1].base_score, 1.0);
        assert_eq!(ranked[2].uid, 0);
    }

    #[test]
    fn bm25_filter_scores_match_bm25_ranking() {
        let b = bundle_from(&[
            ("the cat sat", "d"),
            ("the dog ran", "d"),
            ("a cat and a dog", "d"),
            ("nothing here", "d"),
        ]);
        let q = b.memory().tokenize_query("cat dog");
        let via_filter = retrieve(
            &b,
            &RetrievalRequest::new(q.clone()),
            &RetrievalConfig {
                filter: FilterSpec::Bm25 { cap: 10 },
                ranker: RankerSpec::Bm25,
                ..led_config()
            },
        )
        .unwrap();
        let ranked = rank(&b, &[0, 1, 2, 3], &q, &RankerSpec::Bm25);
        let positive: Vec<_> = ranked.into_iter().filter(|c| c.base_score > 0.0).collect();
        assert_eq!(via_filter.matches.len(), 3);
        for (a, c) in via_filter.matches.iter().zip(&positive) {
            assert_eq!(a.uid, c.uid);
            assert_eq!(a.base_score.to_bits(), c.base_score.to_bits());
        }
    }

    #[test]
    fn contrastive_duplicate_fixture_prefers_the_distinct_source() {
        let mut builder = TmBuilder::new(TokenizerConfig::default());
        builder.add_pair("a b c", "t1", "d");
        builder.add_pair("a b c", "t2", "d");
        builder.add_pair("x y z", "t3", "d");
        let memory = builder.freeze();
        let ranked = vec![
            Candidate { uid: 0, base_score: 0.9, adjusted_score: 0.9 },
            Candidate { uid: 1, base_score: 0.9, adjusted_score: 0.9 },
            Candidate { uid: 2, base_score: 0.7, adjusted_score: 0.7 },
        ];
        let set = contrastive_select(&memory, ranked, 0.3, 2);
        let uids: Vec<u32> = set.matches.iter().map(|c| c.uid).collect();
        // The duplicate's penalized score is 0.9 − 0.3·1.0 = 0.6, below the
        // distinct candidate's 0.7 − 0.3·0.0.
        assert_eq!(uids, vec![0, 2]);
        assert_eq!(set.matches[1].adjusted_score, 0.7);
        assert!(!set.exhausted);
    }

    #[test]
    fn zero_alpha_is_plain_top_k() {
        let b = bundle_from(&[
            ("a b c d", "d"),
            ("a b c e", "d"),
            ("a b f g", "d"),
            ("h i j k", "d"),
        ]);
        let q = b.memory().tokenize_query("a b c d");
        let req = RetrievalRequest::new(q);
        let plain = retrieve(&b, &req, &RetrievalConfig { contrast: None, k: 2, ..led_config() })
            .unwrap();
        let zero = retrieve(
            &b,
            &req,
            &RetrievalConfig { contrast: Some(0.0), k: 2, ..led_config() },
        )
        .unwrap();
        assert_eq!(plain, zero);
    }

    #[test]
    fn exhausted_flag_and_empty_out_of_domain() {
        let b = bundle_from(&[("a b", "only"), ("a c", "only")]);
        let q = b.memory().tokenize_query("a b");
        let mut req = RetrievalRequest::new(q);
        let set = retrieve(&b, &req, &RetrievalConfig { k: 3, ..led_config() }).unwrap();
        assert_eq!(set.matches.len(), 2);
        assert!(set.exhausted);

        req.domain = Some("only".into());
        let set = retrieve(
            &b,
            &req,
            &RetrievalConfig { domain: DomainPolicy::OutOfDomain, ..led_config() },
        )
        .unwrap();
        assert!(set.matches.is_empty());
        assert!(set.exhausted);
    }

    #[test]
    fn score_positivity_drops_disjoint_candidates() {
        let b = bundle_from(&[("a b c", "d"), ("x y z", "d")]);
        let q = b.memory().tokenize_query("a b c");
        let set = retrieve(&b, &RetrievalRequest::new(q), &RetrievalConfig { k: 3, ..led_config() })
            .unwrap();
        let uids: Vec<u32> = set.matches.iter().map(|c| c.uid).collect();
        assert_eq!(uids, vec![0]);
    }

    #[test]
    fn exclude_uid_removes_the_self_match() {
        let b = bundle_from(&[("a b c", "d"), ("a b d", "d")]);
        let q = b.memory().tokenize_query("a b c");
        for filter in [
            FilterSpec::None,
            FilterSpec::Ngm { tau: Ratio::new(3, 10), min_len: 1 },
            FilterSpec::Bm25 { cap: 10 },
        ] {
            let req = RetrievalRequest {
                sentence: q.clone(),
                domain: None,
                exclude_uid: Some(0),
            };
            let set = retrieve(&b, &req, &RetrievalConfig { filter: filter.clone(), ..led_config() })
                .unwrap();
            assert!(
                set.matches.iter().all(|c| c.uid != 0),
                "filter {filter:?} leaked the excluded unit"
            );
        }
    }

    #[test]
    fn filter_soundness_recheck() {
        // Every returned match must satisfy the domain policy and the NGM
        // predicate, re-verified against a brute-force n-gram oracle.
        let sentences = [
            ("a b c d e", "med"),
            ("c d e f g", "med"),
            ("x y z w v", "law"),
            ("a b x y c", "law"),
            ("d e a b c", "med"),
            ("q r s t u", "law"),
        ];
        let b = bundle_from(&sentences);
        let tau = Ratio::new(3, 10);
        let config = RetrievalConfig {
            domain: DomainPolicy::InDomain,
            filter: FilterSpec::Ngm { tau, min_len: 2 },
            ..led_config()
        };
        let q = b.memory().tokenize_query("a b c d");
        let req = RetrievalRequest {
            sentence: q.clone(),
            domain: Some("med".into()),
            exclude_uid: None,
        };
        let set = retrieve(&b, &req, &config).unwrap();
        assert!(!set.matches.is_empty());
        for c in &set.matches {
            let unit = b.memory().unit(c.uid);
            assert_eq!(b.memory().domain_name(unit), "med");
            let g = brute_longest_shared_run(unit.source(), &q);
            assert!(g >= 2);
            assert!(g as u64 * tau.denom() >= tau.numer() * q.len() as u64);
            assert!(c.base_score > 0.0);
        }
    }

    fn brute_longest_shared_run(a: &Sentence, b: &Sentence) -> usize {
        let (xa, xb) = (a.tokens(), b.tokens());
        let mut best = 0;
        for i in 0..xa.len() {
            for j in 0..xb.len() {
                let mut l = 0;
                while i + l < xa.len()
                    && j + l < xb.len()
                    && xa[i + l] == xb[j + l]
                    && !xa[i + l].is_unk()
                {
                    l += 1;
                }
                best = best.max(l);
            }
        }
        best
    }

    #[test]
    fn batch_matches_sequential_retrieval() {
        let b = bundle_from(&[
            ("a b c", "med"),
            ("b c d", "med"),
            ("c d e", "law"),
        ]);
        let reqs: Vec<RetrievalRequest> = ["a b c", "c d e", "zz"]
            .iter()
            .map(|t| RetrievalRequest::new(b.memory().tokenize_query(t)))
            .collect();
        let config = led_config();
        let batch = retrieve_batch(&b, &reqs, &config).unwrap();
        for (req, got) in reqs.iter().zip(&batch) {
            assert_eq!(*got, retrieve(&b, req, &config).unwrap());
        }
    }

    #[test]
    fn batch_reports_bad_domains_with_query_position() {
        let b = bundle_from(&[("a b", "med")]);
        let mut req = RetrievalRequest::new(b.memory().tokenize_query("a"));
        req.domain = Some("nope".into());
        let err = retrieve_batch(
            &b,
            &[req],
            &RetrievalConfig { domain: DomainPolicy::InDomain, ..led_config() },
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("query 1") && msg.contains("nope"), "{msg}");
    }

    #[test]
    fn bm25_contrast_normalizes_to_unit_interval() {
        let b = bundle_from(&[
            ("rare term here", "d"),
            ("rare words", "d"),
            ("rare rare rare", "d"),
            ("unrelated text", "d"),
        ]);
        let q = b.memory().tokenize_query("rare term");
        let set = retrieve(
            &b,
            &RetrievalRequest::new(q),
            &RetrievalConfig {
                ranker: RankerSpec::Bm25,
                contrast: Some(0.3),
                k: 2,
                ..led_config()
            },
        )
        .unwrap();
        assert!(!set.matches.is_empty());
        assert_eq!(set.matches[0].base_score, 1.0);
        for c in &set.matches {
            assert!((0.0..=1.0).contains(&c.base_score));
            assert!(c.adjusted_score <= c.base_score);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = led_config();
        for config in [
            RetrievalConfig { k: 0, ..base.clone() },
            RetrievalConfig {
                filter: FilterSpec::Ngm { tau: Ratio::ZERO, min_len: 3 },
                ..base.clone()
            },
            RetrievalConfig {
                filter: FilterSpec::Ngm { tau: Ratio::new(11, 10), min_len: 3 },
                ..base.clone()
            },
            RetrievalConfig {
                filter: FilterSpec::Ngm { tau: Ratio::new(3, 10), min_len: 0 },
                ..base.clone()
            },
            RetrievalConfig { filter: FilterSpec::Bm25 { cap: 0 }, ..base.clone() },
            RetrievalConfig { contrast: Some(-0.1), ..base.clone() },
            RetrievalConfig { contrast: Some(f64::NAN), ..base },
        ] {
            assert!(config.validate().is_err(), "{config:?} should be invalid");
        }
    }

    #[test]
    fn unknown_query_tokens_never_match() {
        let b = bundle_from(&[("a b c", "d")]);
        let q = b.memory().tokenize_query("zz yy xx");
        assert!(q.tokens().iter().all(|t| t.is_unk()));
        let set = retrieve(
            &b,
            &RetrievalRequest::new(q),
            &RetrievalConfig {
                filter: FilterSpec::Ngm { tau: Ratio::new(3, 10), min_len: 1 },
                ..led_config()
            },
        )
        .unwrap();
        assert!(set.matches.is_empty());
    }
}
