//! Inverted index with Okapi BM25 scoring and common-term pruning.
//!
//! Terms that occur in more than `p` percent of source segments carry next
//! to no signal for fuzzy matching and would drag huge posting lists
//! through every query, so they are dropped at build time. Scoring then
//! touches only the posting union of the query's surviving terms; any
//! document outside that union scores 0 and is never materialized.

use std::collections::HashMap;

use crate::corpus::TranslationMemory;
use crate::ratio::Ratio;
use crate::text::{Sentence, Token, UNK_ID};

/// BM25 term-frequency saturation.
pub const BM25_K1: f64 = 1.2;
/// BM25 length-normalization strength.
pub const BM25_B: f64 = 0.75;

/// Inverted index over source segments.
#[derive(Debug)]
pub struct InvertedIndex {
    /// `postings[term_id]` = ascending `(uid, term_frequency)` pairs.
    /// Empty for pruned terms and for the reserved UNK id.
    postings: Vec<Vec<(u32, u32)>>,
    /// Marks terms dropped by common-term pruning.
    pruned: Vec<bool>,
    doc_len: Vec<u32>,
    avgdl: f64,
    n_docs: u32,
    prune_percent: Ratio,
}

impl InvertedIndex {
    /// Indexes all source segments of `memory`, pruning terms whose
    /// segment frequency strictly exceeds `prune_percent` of all segments.
    pub fn build(memory: &TranslationMemory, prune_percent: Ratio) -> Self {
        let n_terms = memory.vocabulary().len();
        let n_docs = memory.len() as u32;
        let mut postings: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n_terms];
        let mut pruned = vec![false; n_terms];
        for t in 1..n_terms as u32 {
            let df = memory.vocabulary().segment_frequency(Token::new(t));
            // Common iff df / n_docs > p / 100, compared exactly.
            pruned[t as usize] = (df as u128) * 100 * prune_percent.denom() as u128
                > prune_percent.numer() as u128 * n_docs as u128;
        }
        let mut doc_len = Vec::with_capacity(memory.len());
        let mut scratch: Vec<u32> = Vec::new();
        for unit in memory.units() {
            let src = unit.source();
            doc_len.push(src.len() as u32);
            scratch.clear();
            scratch.extend(src.tokens().iter().map(|t| t.id()));
            scratch.sort_unstable();
            let mut i = 0;
            while i < scratch.len() {
                let id = scratch[i];
                let mut j = i + 1;
                while j < scratch.len() && scratch[j] == id {
                    j += 1;
                }
                if id != UNK_ID && !pruned[id as usize] {
                    postings[id as usize].push((unit.uid(), (j - i) as u32));
                }
                i = j;
            }
        }
        let total: u64 = doc_len.iter().map(|&l| l as u64).sum();
        let avgdl = if n_docs == 0 {
            0.0
        } else {
            total as f64 / n_docs as f64
        };
        InvertedIndex {
            postings,
            pruned,
            doc_len,
            avgdl,
            n_docs,
            prune_percent,
        }
    }

    pub fn n_docs(&self) -> u32 {
        self.n_docs
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn prune_percent(&self) -> Ratio {
        self.prune_percent
    }

    pub fn is_pruned(&self, term: Token) -> bool {
        self.pruned
            .get(term.id() as usize)
            .copied()
            .unwrap_or(false)
    }

    pub fn postings(&self, term: Token) -> &[(u32, u32)] {
        self.postings
            .get(term.id() as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Inverse document frequency with the +1 floor, always positive.
    pub fn idf(&self, document_frequency: u32) -> f64 {
        let n = self.n_docs as f64;
        let df = document_frequency as f64;
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }

    /// Scores the posting union of the query's terms and returns the `cap`
    /// best `(uid, score)` pairs, ordered by score descending with uid
    /// ascending on ties. Duplicate query terms count once; UNK, pruned
    /// and absent terms contribute nothing.
    pub fn bm25_candidates(&self, query: &Sentence, cap: usize) -> Vec<(u32, f64)> {
        self.bm25_candidates_where(query, cap, |_| true)
    }

    /// Same as [`Self::bm25_candidates`], restricted to uids accepted by
    /// `keep`. The restriction is applied before the cap so excluded
    /// documents never consume result slots.
    pub fn bm25_candidates_where(
        &self,
        query: &Sentence,
        cap: usize,
        keep: impl Fn(u32) -> bool,
    ) -> Vec<(u32, f64)> {
        let mut out = self.bm25_scores_where(query, keep);
        out.sort_unstable_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("BM25 scores are finite")
                .then(a.0.cmp(&b.0))
        });
        out.truncate(cap);
        out
    }

    /// Unsorted scores over the (restricted) posting union. Term
    /// contributions accumulate in first-occurrence query order, which
    /// keeps the floating-point sums reproducible.
    pub(crate) fn bm25_scores_where(
        &self,
        query: &Sentence,
        keep: impl Fn(u32) -> bool,
    ) -> Vec<(u32, f64)> {
        if self.n_docs == 0 {
            return Vec::new();
        }
        let mut terms: Vec<u32> = Vec::new();
        for t in query.tokens() {
            let id = t.id();
            if id != UNK_ID && !terms.contains(&id) {
                terms.push(id);
            }
        }
        let mut scores: HashMap<u32, f64> = HashMap::new();
        for id in terms {
            let plist = &self.postings[id as usize];
            if plist.is_empty() {
                continue;
            }
            let idf = self.idf(plist.len() as u32);
            for &(uid, tf) in plist {
                if !keep(uid) {
                    continue;
                }
                let tf = tf as f64;
                let dl = self.doc_len[uid as usize] as f64;
                let norm = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * dl / self.avgdl);
                *scores.entry(uid).or_insert(0.0) += idf * tf * (BM25_K1 + 1.0) / norm;
            }
        }
        scores.into_iter().collect()
    }

    pub(crate) fn from_parts(
        memory: &TranslationMemory,
        prune_percent: Ratio,
        postings: Vec<Vec<(u32, u32)>>,
        pruned: Vec<bool>,
    ) -> Self {
        let doc_len: Vec<u32> = memory.units().iter().map(|u| u.source().len() as u32).collect();
        let n_docs = memory.len() as u32;
        let total: u64 = doc_len.iter().map(|&l| l as u64).sum();
        let avgdl = if n_docs == 0 {
            0.0
        } else {
            total as f64 / n_docs as f64
        };
        InvertedIndex {
            postings,
            pruned,
            doc_len,
            avgdl,
            n_docs,
            prune_percent,
        }
    }
}
