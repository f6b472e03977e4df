//! Intrinsic retrieval-quality measures: coverage, relevance, and length
//! of retrieved examples; corpus density from connected components of a
//! similarity graph; and copy rate as multi-reference sentence BLEU with
//! the brevity penalty removed.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::edit::{dp_delta_scaled, ScaledCosts};
use crate::index::SuffixArrayIndex;
use crate::ratio::Ratio;
use crate::text::{Sentence, Token};

/// How query/example token overlap is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QualityVariant {
    /// Bag-of-words: a token occurrence counts as soon as its term appears
    /// anywhere on the other side.
    Bow,
    /// Multiset-clipped: each token occurrence on the other side can cover
    /// at most one occurrence on this side.
    Modified,
}

fn token_counts(sentences: &[Sentence]) -> HashMap<Token, u32> {
    let mut counts = HashMap::new();
    for s in sentences {
        for &t in s.tokens() {
            *counts.entry(t).or_insert(0) += 1;
        }
    }
    counts
}

fn clipped_overlap(a: &HashMap<Token, u32>, b: &HashMap<Token, u32>) -> u32 {
    a.iter()
        .map(|(t, &c)| c.min(b.get(t).copied().unwrap_or(0)))
        .sum()
}

/// Fraction of query token occurrences covered by the examples.
pub fn coverage(query: &Sentence, examples: &[Sentence], variant: QualityVariant) -> f64 {
    if query.is_empty() || examples.is_empty() {
        return 0.0;
    }
    let covered = match variant {
        QualityVariant::Bow => {
            let seen: HashSet<Token> = examples
                .iter()
                .flat_map(|e| e.tokens().iter().copied())
                .collect();
            query.tokens().iter().filter(|t| seen.contains(t)).count() as u32
        }
        QualityVariant::Modified => {
            let q = token_counts(std::slice::from_ref(query));
            clipped_overlap(&q, &token_counts(examples))
        }
    };
    covered as f64 / query.len() as f64
}

/// Mean, over examples, of the fraction of each example's tokens that
/// contribute to covering the query.
pub fn relevance(query: &Sentence, examples: &[Sentence], variant: QualityVariant) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let q_counts = token_counts(std::slice::from_ref(query));
    let total: f64 = examples
        .iter()
        .map(|example| {
            if example.is_empty() {
                return 0.0;
            }
            let contributing = match variant {
                QualityVariant::Bow => example
                    .tokens()
                    .iter()
                    .filter(|t| q_counts.contains_key(t))
                    .count() as u32,
                QualityVariant::Modified => {
                    clipped_overlap(&token_counts(std::slice::from_ref(example)), &q_counts)
                }
            };
            contributing as f64 / example.len() as f64
        })
        .sum();
    total / examples.len() as f64
}

/// Arithmetic mean token count over a batch of examples; 0 when empty.
pub fn mean_length(examples: &[Sentence]) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let total: usize = examples.iter().map(Sentence::len).sum();
    total as f64 / examples.len() as f64
}

/// One query of a metrics batch: its domain label (empty when unlabeled)
/// and the source sides of the retrieved examples.
#[derive(Debug, Clone)]
pub struct RetrievalSample {
    pub domain: String,
    pub query: Sentence,
    pub examples: Vec<Sentence>,
}

/// Coverage / relevance / mean length for a single query.
#[derive(Debug, Clone, Serialize)]
pub struct QueryQuality {
    pub coverage: f64,
    pub relevance: f64,
    pub mean_example_length: f64,
    pub n_examples: usize,
}

/// Per-domain means over that domain's queries.
#[derive(Debug, Clone, Serialize)]
pub struct DomainQuality {
    pub domain: String,
    pub n_queries: usize,
    pub coverage: f64,
    pub relevance: f64,
    pub mean_example_length: f64,
}

/// Batch-level quality aggregate. Headline numbers average per query,
/// then per domain, then macro-average across domains, so domains of
/// different sizes weigh equally.
#[derive(Debug, Clone, Serialize)]
pub struct QualityReport {
    pub coverage: f64,
    pub relevance: f64,
    pub mean_example_length: f64,
    pub n_queries: usize,
    pub per_domain: Vec<DomainQuality>,
    pub per_query: Vec<QueryQuality>,
}

/// Scores a batch of retrievals under one overlap variant.
pub fn quality_report(samples: &[RetrievalSample], variant: QualityVariant) -> QualityReport {
    let per_query: Vec<QueryQuality> = samples
        .iter()
        .map(|s| QueryQuality {
            coverage: coverage(&s.query, &s.examples, variant),
            relevance: relevance(&s.query, &s.examples, variant),
            mean_example_length: mean_length(&s.examples),
            n_examples: s.examples.len(),
        })
        .collect();

    let mut by_domain: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        by_domain.entry(&s.domain).or_default().push(i);
    }
    let per_domain: Vec<DomainQuality> = by_domain
        .into_iter()
        .map(|(domain, idx)| {
            let n = idx.len() as f64;
            let sum = |f: fn(&QueryQuality) -> f64| idx.iter().map(|&i| f(&per_query[i])).sum::<f64>() / n;
            DomainQuality {
                domain: domain.to_string(),
                n_queries: idx.len(),
                coverage: sum(|q| q.coverage),
                relevance: sum(|q| q.relevance),
                mean_example_length: sum(|q| q.mean_example_length),
            }
        })
        .collect();

    let nd = per_domain.len() as f64;
    let macro_mean = |f: fn(&DomainQuality) -> f64| {
        if per_domain.is_empty() {
            0.0
        } else {
            per_domain.iter().map(f).sum::<f64>() / nd
        }
    };
    QualityReport {
        coverage: macro_mean(|d| d.coverage),
        relevance: macro_mean(|d| d.relevance),
        mean_example_length: macro_mean(|d| d.mean_example_length),
        n_queries: samples.len(),
        per_domain,
        per_query,
    }
}

/// How density decides which sentence pairs to test for an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMode {
    /// Compare every pair.
    Exact,
    /// Only compare pairs sharing at least one token, found through a
    /// suffix array. A positive-similarity pair always shares a token, so
    /// for any threshold ≥ 0 this prunes without changing the result.
    Prefiltered,
    /// Exact up to [`DENSITY_EXACT_LIMIT`] sentences, prefiltered beyond.
    Auto,
}

/// Corpus size above which [`DensityMode::Auto`] switches to the
/// prefiltered strategy.
pub const DENSITY_EXACT_LIMIT: usize = 50_000;

/// Outcome of a corpus density measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityResult {
    /// Connected components of the similarity graph.
    pub ncc: usize,
    pub corpus_size: usize,
    /// `1 − (ncc − 1) / (|D| − 1)`; 1.0 for corpora of fewer than two
    /// sentences (see `degenerate`).
    pub density: f64,
    pub threshold: Ratio,
    /// True when the pair set was pruned through the suffix array.
    pub prefiltered: bool,
    /// True when the corpus was too small for the formula to apply.
    pub degenerate: bool,
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            cur = std::mem::replace(&mut self.parent[cur as usize], root);
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
    }

    fn component_count(&mut self) -> usize {
        (0..self.parent.len() as u32)
            .filter(|&x| self.find(x) == x)
            .count()
    }
}

const LED_UNIT: ScaledCosts = ScaledCosts {
    delete: 1,
    insert: 1,
    replace: 1,
    scale: 1,
};

/// Exact check of `Lev(a, b) > threshold` in integer arithmetic.
fn led_above(
    a: &Sentence,
    b: &Sentence,
    threshold: Ratio,
    prev: &mut Vec<u64>,
    cur: &mut Vec<u64>,
) -> bool {
    let max = a.len().max(b.len()) as u64;
    if max == 0 {
        // Two empty sentences count as identical.
        return Ratio::ONE > threshold;
    }
    let delta = dp_delta_scaled(a.tokens(), b.tokens(), &LED_UNIT, prev, cur);
    (max - delta) as u128 * threshold.denom() as u128 > threshold.numer() as u128 * max as u128
}

/// Corpus density per the connected-components formula: sentences are
/// nodes, pairs whose Levenshtein similarity strictly exceeds `threshold`
/// are edges, and `density = 1 − (ncc − 1) / (|D| − 1)`.
pub fn density(sentences: &[&Sentence], threshold: Ratio, mode: DensityMode) -> DensityResult {
    let n = sentences.len();
    let prefiltered = match mode {
        DensityMode::Exact => false,
        DensityMode::Prefiltered => true,
        DensityMode::Auto => n > DENSITY_EXACT_LIMIT,
    };
    if n < 2 {
        return DensityResult {
            ncc: n,
            corpus_size: n,
            density: 1.0,
            threshold,
            prefiltered,
            degenerate: true,
        };
    }

    let neighbor_rows: Vec<Vec<u32>> = if prefiltered {
        let index = SuffixArrayIndex::build(sentences.iter().copied());
        (0..n)
            .into_par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |(prev, cur), i| {
                    let mut shared: Vec<u32> = index
                        .longest_common_ngram(sentences[i], 1)
                        .into_keys()
                        .filter(|&j| j as usize > i)
                        .collect();
                    shared.sort_unstable();
                    shared
                        .into_iter()
                        .filter(|&j| {
                            led_above(sentences[i], sentences[j as usize], threshold, prev, cur)
                        })
                        .collect()
                },
            )
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |(prev, cur), i| {
                    (i + 1..n)
                        .filter(|&j| led_above(sentences[i], sentences[j], threshold, prev, cur))
                        .map(|j| j as u32)
                        .collect()
                },
            )
            .collect()
    };

    let mut components = UnionFind::new(n);
    for (i, row) in neighbor_rows.iter().enumerate() {
        for &j in row {
            components.union(i as u32, j);
        }
    }
    let ncc = components.component_count();
    DensityResult {
        ncc,
        corpus_size: n,
        density: 1.0 - (ncc - 1) as f64 / (n - 1) as f64,
        threshold,
        prefiltered,
        degenerate: false,
    }
}

const BLEU_MAX_ORDER: usize = 4;

fn ngram_counts(tokens: &[Token], n: usize) -> HashMap<&[Token], u32> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

fn closest_reference_len(hyp_len: usize, references: &[Sentence]) -> usize {
    references
        .iter()
        .map(Sentence::len)
        .min_by_key(|&l| (l.abs_diff(hyp_len), l))
        .unwrap_or(0)
}

/// Multi-reference sentence BLEU-4. N-gram matches are clipped against
/// the maximum count over the references; orders the hypothesis is too
/// short to produce are excluded from the geometric mean; orders with no
/// match fall back to the exponentially decaying smoothing floor
/// `1 / (2^z · total)` where `z` counts the zero-match orders so far.
/// Scores are on a 0–100 scale.
pub fn sentence_bleu(
    hypothesis: &Sentence,
    references: &[Sentence],
    apply_brevity_penalty: bool,
) -> f64 {
    let hyp = hypothesis.tokens();
    if hyp.is_empty() || references.is_empty() {
        return 0.0;
    }
    let effective_order = BLEU_MAX_ORDER.min(hyp.len());
    let mut log_sum = 0.0;
    let mut smooth = 1.0f64;
    for n in 1..=effective_order {
        let hyp_counts = ngram_counts(hyp, n);
        let mut max_ref_counts: HashMap<&[Token], u32> = HashMap::new();
        for r in references {
            for (gram, count) in ngram_counts(r.tokens(), n) {
                let slot = max_ref_counts.entry(gram).or_insert(0);
                *slot = (*slot).max(count);
            }
        }
        let matched: u32 = hyp_counts
            .iter()
            .map(|(gram, &c)| c.min(max_ref_counts.get(gram).copied().unwrap_or(0)))
            .sum();
        let total = (hyp.len() - n + 1) as f64;
        let precision = if matched == 0 {
            smooth *= 2.0;
            1.0 / (smooth * total)
        } else {
            matched as f64 / total
        };
        log_sum += precision.ln();
    }
    let mut bleu = (log_sum / effective_order as f64).exp();
    if apply_brevity_penalty {
        let hyp_len = hyp.len() as f64;
        let ref_len = closest_reference_len(hyp.len(), references) as f64;
        if hyp_len < ref_len {
            bleu *= (1.0 - ref_len / hyp_len).exp();
        }
    }
    bleu * 100.0
}

/// Copy rate: sentence BLEU against the retrieved example targets with
/// the brevity penalty removed, so recopying long example spans is never
/// punished for length.
pub fn copy_rate(hypothesis: &Sentence, references: &[Sentence]) -> f64 {
    sentence_bleu(hypothesis, references, false)
}
