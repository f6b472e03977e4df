//! Tokens, sentences and the frozen vocabulary.
//!
//! All retrieval operates on word-level token ids, never on raw strings:
//! edit costs, n-gram matching and BM25 all count whole tokens. The
//! vocabulary is mutable while a translation memory is being built and
//! frozen afterwards; query text is then mapped against the frozen
//! vocabulary and unseen terms become `UNK`, which no matcher ever treats
//! as equal to anything.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Reserved id for out-of-vocabulary tokens.
pub const UNK_ID: u32 = 0;
/// Surface form stored at [`UNK_ID`].
pub const UNK_TERM: &str = "<unk>";

/// A word-level token: an index into the owning [`Vocabulary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(u32);

impl Token {
    pub fn new(id: u32) -> Self {
        Token(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn is_unk(self) -> bool {
        self.0 == UNK_ID
    }
}

/// A tokenized sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Sentence {
    tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Joins surface forms with single spaces. Tokenizing the result with
    /// the same whitespace configuration yields this sentence back.
    pub fn display<'a>(&'a self, vocab: &'a Vocabulary) -> SentenceDisplay<'a> {
        SentenceDisplay {
            sentence: self,
            vocab,
        }
    }
}

pub struct SentenceDisplay<'a> {
    sentence: &'a Sentence,
    vocab: &'a Vocabulary,
}

impl fmt::Display for SentenceDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, tok) in self.sentence.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(self.vocab.term(*tok))?;
        }
        Ok(())
    }
}

/// How raw text is cut into word tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TokenizerMode {
    /// Split on Unicode whitespace only.
    #[default]
    Whitespace,
    /// Split on whitespace, then break off every non-alphanumeric character
    /// as its own token ("don't." becomes `don ' t .`).
    Punctuation,
}

/// Tokenizer settings; stored alongside an index so queries are cut the
/// same way the corpus was.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct TokenizerConfig {
    pub mode: TokenizerMode,
    pub lowercase: bool,
}

impl TokenizerConfig {
    pub fn new(mode: TokenizerMode, lowercase: bool) -> Self {
        TokenizerConfig { mode, lowercase }
    }
}

/// Splits `text` into surface tokens without touching any vocabulary.
/// Runs of whitespace never produce empty tokens.
pub fn split_tokens(text: &str, config: &TokenizerConfig) -> Vec<String> {
    let mut out = Vec::new();
    for_each_token(text, config, |t| out.push(t.to_string()));
    out
}

/// Streaming tokenizer core shared by build and query paths; avoids
/// allocating a `Vec<String>` per sentence on multi-million-line corpora.
pub(crate) fn for_each_token(text: &str, config: &TokenizerConfig, mut f: impl FnMut(&str)) {
    let mut lowered = String::new();
    let mut emit = |piece: &str| {
        if config.lowercase && piece.chars().any(|c| c.is_uppercase()) {
            lowered.clear();
            lowered.extend(piece.chars().flat_map(|c| c.to_lowercase()));
            f(&lowered);
        } else {
            f(piece);
        }
    };
    for chunk in text.split_whitespace() {
        match config.mode {
            TokenizerMode::Whitespace => emit(chunk),
            TokenizerMode::Punctuation => {
                let mut start = 0;
                for (i, c) in chunk.char_indices() {
                    if !c.is_alphanumeric() {
                        if start < i {
                            emit(&chunk[start..i]);
                        }
                        emit(&chunk[i..i + c.len_utf8()]);
                        start = i + c.len_utf8();
                    }
                }
                if start < chunk.len() {
                    emit(&chunk[start..]);
                }
            }
        }
    }
}

/// Bijective term ↔ id table plus per-term segment frequencies (the number
/// of memory source segments containing the term, used for BM25 and its
/// common-term pruning). Id 0 is reserved for [`UNK_TERM`].
#[derive(Debug, Clone)]
pub struct Vocabulary {
    terms: Vec<String>,
    ids: HashMap<String, u32>,
    seg_freq: Vec<u32>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocabulary {
    pub fn new() -> Self {
        let mut ids = HashMap::new();
        ids.insert(UNK_TERM.to_string(), UNK_ID);
        Vocabulary {
            terms: vec![UNK_TERM.to_string()],
            ids,
            seg_freq: vec![0],
        }
    }

    /// Number of terms including the reserved UNK slot.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.len() <= 1
    }

    pub fn term(&self, token: Token) -> &str {
        &self.terms[token.0 as usize]
    }

    pub fn lookup(&self, term: &str) -> Option<Token> {
        self.ids.get(term).copied().map(Token)
    }

    /// Returns the id for `term`, registering it if new (build phase only).
    pub fn intern(&mut self, term: &str) -> Token {
        if let Some(&id) = self.ids.get(term) {
            return Token(id);
        }
        let id = self.terms.len() as u32;
        self.terms.push(term.to_string());
        self.ids.insert(term.to_string(), id);
        self.seg_freq.push(0);
        Token(id)
    }

    /// Segment frequency of a term: how many source segments contain it.
    pub fn segment_frequency(&self, token: Token) -> u32 {
        self.seg_freq[token.0 as usize]
    }

    pub(crate) fn bump_segment_frequency(&mut self, token: Token) {
        self.seg_freq[token.0 as usize] += 1;
    }

    /// Tokenizes build-phase text, registering unseen terms.
    pub fn intern_sentence(&mut self, text: &str, config: &TokenizerConfig) -> Sentence {
        let mut tokens = Vec::new();
        // `for_each_token` borrows `self` mutably through the closure, so
        // collect surfaces per chunk via an explicit loop instead.
        let mut surfaces = Vec::new();
        for_each_token(text, config, |t| surfaces.push(t.to_string()));
        for s in &surfaces {
            tokens.push(self.intern(s));
        }
        Sentence::new(tokens)
    }

    /// Tokenizes query-phase text against the frozen table; unseen terms
    /// map to UNK and will never match any corpus token.
    pub fn tokenize(&self, text: &str, config: &TokenizerConfig) -> Sentence {
        let mut tokens = Vec::new();
        for_each_token(text, config, |t| {
            tokens.push(self.lookup(t).unwrap_or(Token(UNK_ID)));
        });
        Sentence::new(tokens)
    }

    /// Terms in id order; used by index persistence.
    pub(crate) fn terms(&self) -> &[String] {
        &self.terms
    }

    pub(crate) fn seg_freqs(&self) -> &[u32] {
        &self.seg_freq
    }

    /// Rebuilds a vocabulary from its persisted parts.
    pub(crate) fn from_parts(terms: Vec<String>, seg_freq: Vec<u32>) -> Self {
        let ids = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary {
            terms,
            ids,
            seg_freq,
        }
    }
}
