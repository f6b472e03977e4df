//! Suffix array over the concatenated corpus token stream.
//!
//! Every source sentence is appended to one `u32` stream followed by a
//! sentinel that is unique to that sentence, so no match can run across a
//! sentence boundary and all suffixes are pairwise distinct (which makes
//! the sort order total and the build deterministic). Sentinels occupy the
//! low symbol range `0..n_sentences`; token ids are shifted above them.
//! Query tokens that are out of vocabulary are encoded as `u32::MAX`, a
//! symbol that never occurs in the stream, so UNK never matches anything.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::text::Sentence;

/// Searchable suffix array for longest-common-n-gram queries.
#[derive(Debug)]
pub struct SuffixArrayIndex {
    /// Encoded corpus: shifted token ids interleaved with sentinels.
    stream: Vec<u32>,
    /// Stream positions in lexicographic suffix order.
    sa: Vec<u32>,
    /// Owning sentence uid for every stream position.
    pos_uid: Vec<u32>,
    /// `first_bucket[s]..first_bucket[s+1]` is the suffix-order range of
    /// suffixes starting with symbol `s`, replacing the most expensive
    /// (full-range) binary search of every lookup with one table read.
    first_bucket: Vec<u32>,
    /// Second symbol of each suffix, in suffix order (`u32::MAX` for the
    /// length-one suffix at the stream end). Depth-1 narrowing — the most
    /// frequent binary search — reads this contiguous array instead of
    /// chasing `sa` positions through the stream.
    sa_next: Vec<u32>,
    n_sentences: u32,
}

impl SuffixArrayIndex {
    /// Builds the index over the given sentences; `uid` = slice position.
    pub fn build<'a, I>(sentences: I) -> Self
    where
        I: IntoIterator<Item = &'a Sentence>,
        I::IntoIter: ExactSizeIterator,
    {
        let iter = sentences.into_iter();
        let n = iter.len() as u32;
        let mut stream = Vec::new();
        let mut pos_uid = Vec::new();
        let mut max_id = 0u32;
        for (uid, s) in iter.enumerate() {
            for t in s.tokens() {
                max_id = max_id.max(t.id());
                stream.push(n + t.id());
                pos_uid.push(uid as u32);
            }
            stream.push(uid as u32);
            pos_uid.push(uid as u32);
        }
        assert!(
            (n as u64) + (max_id as u64) < u32::MAX as u64,
            "corpus too large for the u32 symbol space"
        );
        let mut sa: Vec<u32> = (0..stream.len() as u32).collect();
        // Unique sentinels make all suffixes distinct: comparison order is
        // total, so an unstable (and parallel) sort stays deterministic.
        sa.par_sort_unstable_by(|&a, &b| stream[a as usize..].cmp(&stream[b as usize..]));
        let first_bucket = Self::symbol_buckets(&stream);
        let sa_next = Self::second_symbols(&stream, &sa);
        SuffixArrayIndex {
            stream,
            sa,
            pos_uid,
            first_bucket,
            sa_next,
            n_sentences: n,
        }
    }

    fn second_symbols(stream: &[u32], sa: &[u32]) -> Vec<u32> {
        sa.iter()
            .map(|&p| stream.get(p as usize + 1).copied().unwrap_or(u32::MAX))
            .collect()
    }

    /// Counting-sort offsets of the leading symbol of every suffix (which
    /// is just every stream symbol).
    fn symbol_buckets(stream: &[u32]) -> Vec<u32> {
        let max_symbol = stream.iter().copied().max().unwrap_or(0) as usize;
        let mut buckets = vec![0u32; max_symbol + 2];
        for &sym in stream {
            buckets[sym as usize + 1] += 1;
        }
        for i in 1..buckets.len() {
            buckets[i] += buckets[i - 1];
        }
        buckets
    }

    /// Suffix-order range of suffixes whose first symbol is `sym`.
    fn bucket_range(&self, sym: u32) -> (usize, usize) {
        let s = sym as usize;
        if s + 1 >= self.first_bucket.len() {
            return (0, 0);
        }
        (self.first_bucket[s] as usize, self.first_bucket[s + 1] as usize)
    }

    pub fn n_sentences(&self) -> u32 {
        self.n_sentences
    }

    /// Sorted suffix positions; exposed for persistence and tests.
    pub fn positions(&self) -> &[u32] {
        &self.sa
    }

    /// Reassembles an index from persisted suffix positions plus the
    /// original sentences (stream and uid map are derived).
    pub(crate) fn from_saved<'a, I>(sentences: I, sa: Vec<u32>) -> Self
    where
        I: IntoIterator<Item = &'a Sentence>,
        I::IntoIter: ExactSizeIterator,
    {
        let mut rebuilt = Self::build_stream_only(sentences);
        assert_eq!(
            sa.len(),
            rebuilt.stream.len(),
            "suffix positions must cover the stream"
        );
        rebuilt.sa = sa;
        rebuilt.first_bucket = Self::symbol_buckets(&rebuilt.stream);
        rebuilt.sa_next = Self::second_symbols(&rebuilt.stream, &rebuilt.sa);
        rebuilt
    }

    fn build_stream_only<'a, I>(sentences: I) -> Self
    where
        I: IntoIterator<Item = &'a Sentence>,
        I::IntoIter: ExactSizeIterator,
    {
        let iter = sentences.into_iter();
        let n = iter.len() as u32;
        let mut stream = Vec::new();
        let mut pos_uid = Vec::new();
        for (uid, s) in iter.enumerate() {
            for t in s.tokens() {
                stream.push(n + t.id());
                pos_uid.push(uid as u32);
            }
            stream.push(uid as u32);
            pos_uid.push(uid as u32);
        }
        SuffixArrayIndex {
            stream,
            sa: Vec::new(),
            pos_uid,
            first_bucket: Vec::new(),
            sa_next: Vec::new(),
            n_sentences: n,
        }
    }

    /// Encodes a query token for stream comparison.
    fn encode_query_symbol(&self, t: crate::text::Token) -> u32 {
        if t.is_unk() {
            u32::MAX
        } else {
            self.n_sentences + t.id()
        }
    }

    /// For every sentence sharing a contiguous n-gram of length ≥ `min_len`
    /// with the query, the length of the longest such n-gram.
    ///
    /// Walks each query start position, extending the matched prefix one
    /// token at a time while narrowing the suffix-array range; positions
    /// that drop out of the range at depth `len` share exactly `len` tokens
    /// with that query start. The first symbol resolves through the bucket
    /// table, deeper levels by binary search within the shrinking range, so
    /// per-query cost is O(ℓ · log(bucket)) plus the size of the ranges
    /// actually attributed.
    pub fn longest_common_ngram(
        &self,
        query: &Sentence,
        min_len: usize,
    ) -> HashMap<u32, u32> {
        assert!(min_len >= 1, "min_len must be at least 1");
        let mut best: HashMap<u32, u32> = HashMap::new();
        let q: Vec<u32> = query
            .tokens()
            .iter()
            .map(|&t| self.encode_query_symbol(t))
            .collect();
        for start in 0..q.len() {
            let (mut lo, mut hi) = (0usize, self.sa.len());
            let mut len = 0usize;
            loop {
                let (nlo, nhi) = if start + len == q.len() || lo == hi {
                    (lo, lo)
                } else if len == 0 {
                    self.bucket_range(q[start])
                } else {
                    self.narrow(lo, hi, len, q[start + len])
                };
                if len >= min_len {
                    for &p in self.sa[lo..nlo].iter().chain(self.sa[nhi..hi].iter()) {
                        self.credit(&mut best, p, len as u32);
                    }
                }
                if nlo == nhi {
                    break;
                }
                lo = nlo;
                hi = nhi;
                len += 1;
            }
        }
        best
    }

    fn credit(&self, best: &mut HashMap<u32, u32>, pos: u32, len: u32) {
        let uid = self.pos_uid[pos as usize];
        let entry = best.entry(uid).or_insert(0);
        if len > *entry {
            *entry = len;
        }
    }

    /// Narrows `sa[lo..hi]` (all sharing a prefix of length `depth`) to the
    /// subrange whose symbol at `depth` equals `sym`. Within the range that
    /// symbol is non-decreasing, so two partition points suffice.
    fn narrow(&self, lo: usize, hi: usize, depth: usize, sym: u32) -> (usize, usize) {
        if depth == 1 {
            let seg = &self.sa_next[lo..hi];
            let nlo = lo + seg.partition_point(|&s| s < sym);
            let nhi = lo + seg.partition_point(|&s| s <= sym);
            return (nlo, nhi);
        }
        let seg = &self.sa[lo..hi];
        let at = |p: u32| self.stream[p as usize + depth];
        let nlo = lo + seg.partition_point(|&p| at(p) < sym);
        let nhi = lo + seg.partition_point(|&p| at(p) <= sym);
        (nlo, nhi)
    }
}
