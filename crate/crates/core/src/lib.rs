//! Fuzzy-match retrieval over translation memories.
//!
//! Given a tokenized source-language query and an indexed parallel corpus,
//! this crate finds the top-k most useful translation examples under
//! configurable domain selection, candidate filtering (longest-common
//! n-gram or BM25), ranking (weighted edit-distance similarity or BM25)
//! and an optional diversity-aware re-ranking pass. It also measures the
//! intrinsic quality of retrievals (coverage, relevance, length), corpus
//! repetitiveness (density) and target-side reuse (copy rate).
//!
//! The pieces compose as:
//!
//! * [`corpus`] ingests parallel text into an immutable [`TranslationMemory`];
//! * [`index`] builds the suffix array and inverted index and persists the
//!   whole bundle as a versioned binary container;
//! * [`edit`] scores sentence pairs with the exact weighted edit-distance
//!   family (Levenshtein, LCS and δ-LCS presets);
//! * [`pipeline`] runs domain selection → filter → rank → top-k for one
//!   query or a parallel batch;
//! * [`metrics`] reports retrieval quality and corpus density.
//!
//! Scores that feed ranking decisions are computed in exact integer or
//! rational arithmetic wherever a tie could otherwise depend on float
//! rounding, so identical inputs produce identical retrievals on any
//! thread count.

pub mod corpus;
pub mod edit;
pub mod error;
pub mod index;
pub mod metrics;
pub mod pipeline;
pub mod ratio;
pub mod text;

pub use corpus::{IngestStats, TmBuilder, TranslationMemory, TranslationUnit};
pub use edit::{edit_distance, lcs_length, led_similarity, EditCosts, EditResult};
pub use error::{Error, Result};
pub use index::{IndexBundle, InvertedIndex, SuffixArrayIndex};
pub use metrics::{
    copy_rate, coverage, density, mean_length, quality_report, relevance, sentence_bleu,
    DensityMode, DensityResult, QualityReport, QualityVariant, RetrievalSample,
};
pub use pipeline::{
    contrastive_select, ngm_filter, rank, retrieve, retrieve_batch, retrieve_timed,
    select_domain, Candidate, DomainPolicy, FilterSpec, RankerSpec, RetrievalConfig,
    RetrievalRequest, RetrievedSet, StageTimings,
};
pub use ratio::Ratio;
pub use text::{Sentence, Token, TokenizerConfig, TokenizerMode, Vocabulary};
