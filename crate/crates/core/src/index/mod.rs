//! Retrieval indexes: suffix array, inverted index, and their on-disk
//! container.

pub mod inverted;
pub mod store;
pub mod suffix;

use std::fs;
use std::path::Path;

use crate::corpus::{TranslationMemory, TranslationUnit};
use crate::error::{Error, Result};
use crate::ratio::Ratio;
use crate::text::{Sentence, Token, TokenizerConfig, TokenizerMode, Vocabulary};

pub use inverted::InvertedIndex;
pub use suffix::SuffixArrayIndex;

/// A frozen translation memory together with both retrieval indexes and
/// the build parameters they were created with. This is the unit that gets
/// persisted and handed to the retrieval pipeline.
#[derive(Debug)]
pub struct IndexBundle {
    memory: TranslationMemory,
    suffix: SuffixArrayIndex,
    inverted: InvertedIndex,
}

impl IndexBundle {
    /// Builds both indexes over a frozen memory.
    pub fn build(memory: TranslationMemory, prune_percent: Ratio) -> Self {
        let suffix = SuffixArrayIndex::build(memory.units().iter().map(|u| u.source()));
        let inverted = InvertedIndex::build(&memory, prune_percent);
        IndexBundle {
            memory,
            suffix,
            inverted,
        }
    }

    pub fn memory(&self) -> &TranslationMemory {
        &self.memory
    }

    pub fn suffix(&self) -> &SuffixArrayIndex {
        &self.suffix
    }

    pub fn inverted(&self) -> &InvertedIndex {
        &self.inverted
    }

    /// Serializes the container: tokenizer settings, prune percentage,
    /// domains, vocabulary with segment frequencies, units, suffix
    /// positions and posting lists, behind a magic header and version byte.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut e = store::Encoder::new();
        let tok = self.memory.tokenizer();
        e.u8(match tok.mode {
            TokenizerMode::Whitespace => 0,
            TokenizerMode::Punctuation => 1,
        });
        e.u8(tok.lowercase as u8);
        let p = self.inverted.prune_percent();
        e.u64(p.numer());
        e.u64(p.denom());

        let domains = self.memory.domains();
        e.u32(domains.len() as u32);
        for d in domains {
            e.str(d);
        }

        let vocab = self.memory.vocabulary();
        e.u32(vocab.len() as u32);
        for term in vocab.terms() {
            e.str(term);
        }
        for &f in vocab.seg_freqs() {
            e.u32(f);
        }

        e.u32(self.memory.len() as u32);
        for unit in self.memory.units() {
            e.u16(unit.domain_id());
            e.u32(unit.source().len() as u32);
            for t in unit.source().tokens() {
                e.u32(t.id());
            }
            e.u32(unit.target().len() as u32);
            for t in unit.target().tokens() {
                e.u32(t.id());
            }
        }

        e.u32_slice(self.suffix.positions());

        e.u32(vocab.len() as u32);
        for id in 0..vocab.len() as u32 {
            let t = Token::new(id);
            e.u8(self.inverted.is_pruned(t) as u8);
            let plist = self.inverted.postings(t);
            e.u32(plist.len() as u32);
            for &(uid, tf) in plist {
                e.u32(uid);
                e.u32(tf);
            }
        }

        fs::write(path, e.into_bytes()).map_err(|err| Error::io(path, err))
    }

    /// Loads and validates a container written by [`Self::save`].
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|err| Error::io(path, err))?;
        let mut d = store::Decoder::new(&bytes)?;
        let bad = |what: &str| Error::IndexFormat(format!("invalid container field: {what}"));

        let mode = match d.u8()? {
            0 => TokenizerMode::Whitespace,
            1 => TokenizerMode::Punctuation,
            _ => return Err(bad("tokenizer mode")),
        };
        let lowercase = match d.u8()? {
            0 => false,
            1 => true,
            _ => return Err(bad("lowercase flag")),
        };
        let tokenizer = TokenizerConfig::new(mode, lowercase);
        let p_num = d.u64()?;
        let p_den = d.u64()?;
        if p_den == 0 {
            return Err(bad("prune percentage"));
        }
        let prune_percent = Ratio::new(p_num, p_den);

        let n_domains = d.u32()? as usize;
        let mut domains = Vec::with_capacity(n_domains);
        for _ in 0..n_domains {
            domains.push(d.str()?);
        }

        let n_terms = d.u32()? as usize;
        if n_terms == 0 {
            return Err(bad("empty vocabulary"));
        }
        let mut terms = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            terms.push(d.str()?);
        }
        let mut seg_freq = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            seg_freq.push(d.u32()?);
        }
        let vocab = Vocabulary::from_parts(terms, seg_freq);

        let n_units = d.u32()? as usize;
        let mut units: Vec<TranslationUnit> = Vec::with_capacity(n_units);
        let mut stream_len: u64 = 0;
        for uid in 0..n_units {
            let domain = d.u16()?;
            if domain as usize >= n_domains {
                return Err(bad("unit domain id"));
            }
            let read_side = |d: &mut store::Decoder| -> Result<Sentence> {
                let len = d.u32()? as usize;
                let mut toks = Vec::with_capacity(len);
                for _ in 0..len {
                    let id = d.u32()?;
                    if id as usize >= n_terms {
                        return Err(bad("token id out of vocabulary"));
                    }
                    toks.push(Token::new(id));
                }
                Ok(Sentence::new(toks))
            };
            let source = read_side(&mut d)?;
            let target = read_side(&mut d)?;
            if source.is_empty() || target.is_empty() {
                return Err(bad("empty unit side"));
            }
            stream_len += source.len() as u64 + 1;
            units.push(TranslationMemory::make_unit(uid as u32, source, target, domain));
        }

        let sa = d.u32_vec()?;
        if sa.len() as u64 != stream_len {
            return Err(bad("suffix position count"));
        }
        let mut seen = vec![false; sa.len()];
        for &p in &sa {
            let slot = seen
                .get_mut(p as usize)
                .ok_or_else(|| bad("suffix position out of range"))?;
            if *slot {
                return Err(bad("duplicate suffix position"));
            }
            *slot = true;
        }

        let n_posting_terms = d.u32()? as usize;
        if n_posting_terms != n_terms {
            return Err(bad("posting table size"));
        }
        let mut postings = Vec::with_capacity(n_terms);
        let mut pruned = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            pruned.push(match d.u8()? {
                0 => false,
                1 => true,
                _ => return Err(bad("pruned flag")),
            });
            let df = d.u32()? as usize;
            let mut plist = Vec::with_capacity(df);
            let mut prev: Option<u32> = None;
            for _ in 0..df {
                let uid = d.u32()?;
                let tf = d.u32()?;
                if uid as usize >= n_units || tf == 0 {
                    return Err(bad("posting entry"));
                }
                if prev.is_some_and(|p| p >= uid) {
                    return Err(bad("posting order"));
                }
                prev = Some(uid);
                plist.push((uid, tf));
            }
            postings.push(plist);
        }
        if !d.finished() {
            return Err(Error::IndexFormat("trailing bytes in container".into()));
        }

        let memory = TranslationMemory::from_parts(tokenizer, vocab, units, domains);
        let suffix = SuffixArrayIndex::from_saved(memory.units().iter().map(|u| u.source()), sa);
        let inverted = InvertedIndex::from_parts(&memory, prune_percent, postings, pruned);
        Ok(IndexBundle {
            memory,
            suffix,
            inverted,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TmBuilder;

    fn bundle() -> IndexBundle {
        let mut b = TmBuilder::new(TokenizerConfig::default());
        b.add_pair("the cat sat on the mat", "le chat", "med");
        b.add_pair("a dog sat", "un chien", "med");
        b.add_pair("entirely different", "tout autre", "law");
        IndexBundle::build(b.freeze(), Ratio::from_int(2))
    }

    #[test]
    fn save_load_round_trip_preserves_behavior() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tm.idx");
        let original = bundle();
        original.save(&path).unwrap();
        let loaded = IndexBundle::load(&path).unwrap();

        assert_eq!(loaded.memory().len(), original.memory().len());
        assert_eq!(loaded.memory().domains(), original.memory().domains());
        assert_eq!(loaded.suffix().positions(), original.suffix().positions());
        assert_eq!(
            loaded.inverted().prune_percent(),
            original.inverted().prune_percent()
        );
        assert_eq!(loaded.memory().source_text(0), "the cat sat on the mat");
        assert_eq!(loaded.memory().target_text(2), "tout autre");

        let q = loaded.memory().tokenize_query("cat sat on");
        let a = original.suffix().longest_common_ngram(&q, 1);
        let b = loaded.suffix().longest_common_ngram(&q, 1);
        assert_eq!(a, b);
        assert_eq!(
            original.inverted().bm25_candidates(&q, 10),
            loaded.inverted().bm25_candidates(&q, 10)
        );
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tm.idx");
        bundle().save(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = store::FORMAT_VERSION + 1;
        std::fs::write(&path, bytes).unwrap();
        let err = IndexBundle::load(&path).unwrap_err();
        assert!(matches!(err, Error::IndexFormat(_)), "{err}");
    }

    #[test]
    fn corrupted_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tm.idx");
        bundle().save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        let err = IndexBundle::load(&path).unwrap_err();
        assert!(matches!(err, Error::IndexFormat(_)), "{err}");
    }

    #[test]
    fn garbage_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tm.idx");
        std::fs::write(&path, b"not an index at all").unwrap();
        assert!(matches!(
            IndexBundle::load(&path).unwrap_err(),
            Error::IndexFormat(_)
        ));
    }
}
