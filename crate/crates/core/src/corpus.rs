//! Translation memory construction and ingestion.
//!
//! A [`TranslationMemory`] is an immutable bank of aligned sentence pairs.
//! It is assembled through [`TmBuilder`], which owns the only mutable
//! vocabulary; freezing hands out a memory whose uids are densely numbered
//! in insertion order, so every downstream index can use plain vectors.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::{Sentence, Token, TokenizerConfig, Vocabulary};

/// One aligned sentence pair in the memory.
#[derive(Debug, Clone)]
pub struct TranslationUnit {
    uid: u32,
    source: Sentence,
    target: Sentence,
    domain: u16,
}

impl TranslationUnit {
    pub fn uid(&self) -> u32 {
        self.uid
    }

    pub fn source(&self) -> &Sentence {
        &self.source
    }

    pub fn target(&self) -> &Sentence {
        &self.target
    }

    pub(crate) fn domain_id(&self) -> u16 {
        self.domain
    }
}

/// Counters reported by every ingestion call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    /// Pairs added to the memory.
    pub added: usize,
    /// Pairs dropped because one side tokenized to nothing.
    pub skipped_empty: usize,
}

/// Accumulates corpora, then freezes into a [`TranslationMemory`].
#[derive(Debug)]
pub struct TmBuilder {
    tokenizer: TokenizerConfig,
    vocab: Vocabulary,
    units: Vec<TranslationUnit>,
    domains: Vec<String>,
    seen_scratch: Vec<Token>,
}

impl TmBuilder {
    pub fn new(tokenizer: TokenizerConfig) -> Self {
        TmBuilder {
            tokenizer,
            vocab: Vocabulary::new(),
            units: Vec::new(),
            domains: Vec::new(),
            seen_scratch: Vec::new(),
        }
    }

    fn domain_id(&mut self, domain: &str) -> u16 {
        if let Some(i) = self.domains.iter().position(|d| d == domain) {
            return i as u16;
        }
        assert!(
            self.domains.len() < u16::MAX as usize,
            "too many distinct domains"
        );
        self.domains.push(domain.to_string());
        (self.domains.len() - 1) as u16
    }

    /// Adds one pair. Returns `false` (and skips it) when either side
    /// tokenizes to an empty sentence.
    pub fn add_pair(&mut self, source: &str, target: &str, domain: &str) -> bool {
        let src = self.vocab.intern_sentence(source, &self.tokenizer);
        let trg = self.vocab.intern_sentence(target, &self.tokenizer);
        if src.is_empty() || trg.is_empty() {
            return false;
        }
        // Segment frequency counts each source segment once per term.
        self.seen_scratch.clear();
        self.seen_scratch.extend_from_slice(src.tokens());
        self.seen_scratch.sort_unstable();
        self.seen_scratch.dedup();
        for i in 0..self.seen_scratch.len() {
            self.vocab.bump_segment_frequency(self.seen_scratch[i]);
        }
        let domain = self.domain_id(domain);
        let uid = self.units.len() as u32;
        self.units.push(TranslationUnit {
            uid,
            source: src,
            target: trg,
            domain,
        });
        true
    }

    /// Ingests two aligned one-sentence-per-line files. The files must have
    /// the same number of lines; pairs with an empty side are skipped and
    /// counted.
    pub fn add_parallel_files(
        &mut self,
        source_path: &Path,
        target_path: &Path,
        domain: &str,
    ) -> Result<IngestStats> {
        let open = |p: &Path| -> Result<BufReader<File>> {
            Ok(BufReader::new(
                File::open(p).map_err(|e| Error::io(p, e))?,
            ))
        };
        let mut src_lines = open(source_path)?.lines();
        let mut trg_lines = open(target_path)?.lines();
        let mut stats = IngestStats::default();
        let mut line_no = 0usize;
        loop {
            line_no += 1;
            let src = src_lines
                .next()
                .transpose()
                .map_err(|e| Error::io(source_path, e))?;
            let trg = trg_lines
                .next()
                .transpose()
                .map_err(|e| Error::io(target_path, e))?;
            match (src, trg) {
                (Some(s), Some(t)) => {
                    if self.add_pair(&s, &t, domain) {
                        stats.added += 1;
                    } else {
                        stats.skipped_empty += 1;
                    }
                }
                (None, None) => break,
                (Some(_), None) | (None, Some(_)) => {
                    return Err(Error::CorpusShape(format!(
                        "{} and {} differ in line count (first unmatched line {})",
                        source_path.display(),
                        target_path.display(),
                        line_no
                    )));
                }
            }
        }
        Ok(stats)
    }

    /// Ingests a `source<TAB>target` file. Rows without exactly two fields
    /// are a shape error.
    pub fn add_tsv_file(&mut self, path: &Path, domain: &str) -> Result<IngestStats> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut stats = IngestStats::default();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let mut fields = line.split('\t');
            let (src, trg) = match (fields.next(), fields.next(), fields.next()) {
                (Some(s), Some(t), None) => (s, t),
                _ => {
                    return Err(Error::CorpusShape(format!(
                        "{}:{}: expected exactly two tab-separated fields",
                        path.display(),
                        i + 1
                    )));
                }
            };
            if self.add_pair(src, trg, domain) {
                stats.added += 1;
            } else {
                stats.skipped_empty += 1;
            }
        }
        Ok(stats)
    }

    pub fn tokenizer(&self) -> &TokenizerConfig {
        &self.tokenizer
    }

    /// Freezes the builder. The vocabulary becomes immutable and per-domain
    /// uid lists are fixed.
    pub fn freeze(self) -> TranslationMemory {
        let mut domain_units: Vec<Vec<u32>> = vec![Vec::new(); self.domains.len()];
        for u in &self.units {
            domain_units[u.domain as usize].push(u.uid);
        }
        TranslationMemory {
            tokenizer: self.tokenizer,
            vocab: self.vocab,
            units: self.units,
            domains: self.domains,
            domain_units,
        }
    }
}

/// Immutable bank of translation units with its frozen vocabulary.
#[derive(Debug)]
pub struct TranslationMemory {
    tokenizer: TokenizerConfig,
    vocab: Vocabulary,
    units: Vec<TranslationUnit>,
    domains: Vec<String>,
    domain_units: Vec<Vec<u32>>,
}

impl TranslationMemory {
    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn unit(&self, uid: u32) -> &TranslationUnit {
        &self.units[uid as usize]
    }

    pub fn units(&self) -> &[TranslationUnit] {
        &self.units
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn tokenizer(&self) -> &TokenizerConfig {
        &self.tokenizer
    }

    /// Tokenizes query text against the frozen vocabulary.
    pub fn tokenize_query(&self, text: &str) -> Sentence {
        self.vocab.tokenize(text, &self.tokenizer)
    }

    pub fn domain_name(&self, unit: &TranslationUnit) -> &str {
        &self.domains[unit.domain_id() as usize]
    }

    pub fn domains(&self) -> &[String] {
        &self.domains
    }

    pub fn domain_index(&self, domain: &str) -> Option<u16> {
        self.domains.iter().position(|d| d == domain).map(|i| i as u16)
    }

    /// Uids belonging to one domain, ascending.
    pub fn domain_uids(&self, domain_id: u16) -> &[u32] {
        &self.domain_units[domain_id as usize]
    }

    pub fn source_text(&self, uid: u32) -> String {
        self.unit(uid).source().display(&self.vocab).to_string()
    }

    pub fn target_text(&self, uid: u32) -> String {
        self.unit(uid).target().display(&self.vocab).to_string()
    }

    /// Mean source length in tokens.
    pub fn mean_source_len(&self) -> f64 {
        if self.units.is_empty() {
            return 0.0;
        }
        let total: usize = self.units.iter().map(|u| u.source.len()).sum();
        total as f64 / self.units.len() as f64
    }

    pub(crate) fn from_parts(
        tokenizer: TokenizerConfig,
        vocab: Vocabulary,
        units: Vec<TranslationUnit>,
        domains: Vec<String>,
    ) -> Self {
        let mut domain_units: Vec<Vec<u32>> = vec![Vec::new(); domains.len()];
        for u in &units {
            domain_units[u.domain as usize].push(u.uid);
        }
        TranslationMemory {
            tokenizer,
            vocab,
            units,
            domains,
            domain_units,
        }
    }

    pub(crate) fn make_unit(
        uid: u32,
        source: Sentence,
        target: Sentence,
        domain: u16,
    ) -> TranslationUnit {
        TranslationUnit {
            uid,
            source,
            target,
            domain,
        }
    }
}
