//! Seeded synthetic parallel corpora. Sources are random word sequences;
//! targets are a deterministic per-word character-reversal cipher of the
//! source, so copy-rate and alignment fixtures have known answers without
//! shipping any real bilingual data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tmr_core::{Error, Result, TmBuilder, TokenizerConfig, TokenizerMode, TranslationMemory};

/// Shape of a generated corpus. The same spec always produces the same
/// corpus, byte for byte.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// Number of translation units.
    pub units: usize,
    /// Distinct word stems to draw from.
    pub vocabulary: u32,
    /// Average sentence length; actual lengths are uniform in
    /// `[⌈ℓ/2⌉, ℓ + ℓ/2]`.
    pub mean_len: usize,
    /// Probability that a sentence clones an earlier one instead of being
    /// drawn fresh. Higher values raise the corpus connected-component
    /// density.
    pub repetition: f64,
    /// Domain labels `d0..d{domains-1}`, assigned round-robin.
    pub domains: u16,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let config = |msg: &str| Err(Error::Config(msg.into()));
        if self.units == 0 {
            return config("synthetic corpus needs at least one unit");
        }
        if self.vocabulary == 0 {
            return config("synthetic vocabulary must be at least 1");
        }
        if self.mean_len == 0 {
            return config("synthetic mean length must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.repetition) {
            return config("repetition rate must lie in [0, 1]");
        }
        if self.domains == 0 {
            return config("synthetic corpus needs at least one domain");
        }
        Ok(())
    }
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            units: 1_000,
            vocabulary: 2_000,
            mean_len: 10,
            repetition: 0.3,
            domains: 2,
            seed: 42,
        }
    }
}

/// Reverses the characters of every word, keeping word order: the target
/// side of a clone is exactly the clone's target, and no target word ever
/// collides with a source word longer than one character.
fn cipher(source: &str) -> String {
    source
        .split(' ')
        .map(|w| w.chars().rev().collect::<String>())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Builds a translation memory from the spec. Deterministic: the entire
/// corpus is a pure function of the spec, including the seed.
pub fn generate_corpus(spec: &SyntheticSpec) -> Result<TranslationMemory> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut builder = TmBuilder::new(TokenizerConfig::new(TokenizerMode::Whitespace, false));
    let mut sources: Vec<String> = Vec::with_capacity(spec.units);
    let low = spec.mean_len.div_ceil(2);
    let high = spec.mean_len + spec.mean_len / 2;
    for i in 0..spec.units {
        let source = if !sources.is_empty() && rng.random_bool(spec.repetition) {
            sources[rng.random_range(0..sources.len())].clone()
        } else {
            let len = rng.random_range(low..=high);
            let words: Vec<String> = (0..len)
                .map(|_| format!("w{}", rng.random_range(0..spec.vocabulary)))
                .collect();
            words.join(" ")
        };
        let domain = format!("d{}", i % spec.domains as usize);
        builder.add_pair(&source, &cipher(&source), &domain);
        sources.push(source);
    }
    Ok(builder.freeze())
}

/// One experiment query: text plus the domain it came from, with the
/// originating unit excluded so self-matches cannot dominate comparisons.
#[derive(Debug, Clone)]
pub struct BenchQuery {
    pub text: String,
    pub domain: Option<String>,
    pub exclude_uid: Option<u32>,
}

/// Draws `count` queries by sampling memory sentences and rewriting each
/// token with probability `mutation` to a token taken from elsewhere in
/// the memory. `mutation` 0 yields exact memory sentences (leave-one-out
/// via `exclude_uid`); higher values yield progressively fuzzier queries.
pub fn perturbed_queries(
    memory: &TranslationMemory,
    count: usize,
    mutation: f64,
    seed: u64,
) -> Result<Vec<BenchQuery>> {
    if memory.is_empty() {
        return Err(Error::Config("cannot sample queries from an empty memory".into()));
    }
    if !(0.0..=1.0).contains(&mutation) {
        return Err(Error::Config("query mutation rate must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_units = memory.len() as u32;
    let random_word = |rng: &mut ChaCha8Rng| {
        let unit = memory.unit(rng.random_range(0..n_units));
        let tokens = unit.source().tokens();
        memory.vocabulary().term(tokens[rng.random_range(0..tokens.len())]).to_string()
    };
    let mut queries = Vec::with_capacity(count);
    for _ in 0..count {
        let uid = rng.random_range(0..n_units);
        let unit = memory.unit(uid);
        let words: Vec<String> = memory
            .source_text(uid)
            .split(' ')
            .map(|w| {
                if mutation > 0.0 && rng.random_bool(mutation) {
                    random_word(&mut rng)
                } else {
                    w.to_string()
                }
            })
            .collect();
        queries.push(BenchQuery {
            text: words.join(" "),
            domain: Some(memory.domain_name(unit).to_string()),
            exclude_uid: Some(uid),
        });
    }
    Ok(queries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tmr_core::metrics::{density, DensityMode};
    use tmr_core::Ratio;

    fn corpus_density(spec: &SyntheticSpec) -> f64 {
        let memory = generate_corpus(spec).unwrap();
        let sentences: Vec<_> = memory.units().iter().map(|u| u.source()).collect();
        density(&sentences, Ratio::new(2, 5), DensityMode::Exact).density
    }

    #[test]
    fn same_seed_reproduces_the_corpus_exactly() {
        let spec = SyntheticSpec { units: 200, ..SyntheticSpec::default() };
        let a = generate_corpus(&spec).unwrap();
        let b = generate_corpus(&spec).unwrap();
        assert_eq!(a.len(), b.len());
        for uid in 0..a.len() as u32 {
            assert_eq!(a.source_text(uid), b.source_text(uid));
            assert_eq!(a.target_text(uid), b.target_text(uid));
            assert_eq!(a.domain_name(a.unit(uid)), b.domain_name(b.unit(uid)));
        }
        let different = generate_corpus(&SyntheticSpec { seed: 43, ..spec }).unwrap();
        let changed = (0..a.len() as u32).any(|u| a.source_text(u) != different.source_text(u));
        assert!(changed, "a different seed should produce a different corpus");
    }

    #[test]
    fn all_clones_give_density_one_and_disjoint_sentences_zero() {
        let all_clones = SyntheticSpec {
            units: 30,
            repetition: 1.0,
            ..SyntheticSpec::default()
        };
        assert_eq!(corpus_density(&all_clones), 1.0);

        let scattered = SyntheticSpec {
            units: 40,
            vocabulary: 100_000,
            repetition: 0.0,
            ..SyntheticSpec::default()
        };
        let d = corpus_density(&scattered);
        assert!(d < 0.05, "near-disjoint corpus has density {d}");
    }

    #[test]
    fn higher_repetition_yields_higher_density() {
        let base = SyntheticSpec { units: 60, ..SyntheticSpec::default() };
        let low = corpus_density(&SyntheticSpec { repetition: 0.05, ..base.clone() });
        let high = corpus_density(&SyntheticSpec { repetition: 0.7, ..base });
        assert!(high > low, "repetition 0.7 gave {high}, 0.05 gave {low}");
    }

    #[test]
    fn targets_are_the_word_reversal_cipher_of_sources() {
        let memory = generate_corpus(&SyntheticSpec {
            units: 25,
            ..SyntheticSpec::default()
        })
        .unwrap();
        for uid in 0..memory.len() as u32 {
            assert_eq!(memory.target_text(uid), cipher(&memory.source_text(uid)));
        }
        assert_eq!(cipher("w12 w3"), "21w 3w");
    }

    #[test]
    fn units_spread_round_robin_over_domains() {
        let memory = generate_corpus(&SyntheticSpec {
            units: 10,
            domains: 3,
            ..SyntheticSpec::default()
        })
        .unwrap();
        assert_eq!(memory.domains().len(), 3);
        assert_eq!(memory.domain_name(memory.unit(0)), "d0");
        assert_eq!(memory.domain_name(memory.unit(4)), "d1");
        assert_eq!(memory.domain_name(memory.unit(8)), "d2");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let ok = SyntheticSpec::default();
        assert!(SyntheticSpec { units: 0, ..ok.clone() }.validate().is_err());
        assert!(SyntheticSpec { vocabulary: 0, ..ok.clone() }.validate().is_err());
        assert!(SyntheticSpec { mean_len: 0, ..ok.clone() }.validate().is_err());
        assert!(SyntheticSpec { repetition: 1.5, ..ok.clone() }.validate().is_err());
        assert!(SyntheticSpec { domains: 0, ..ok.clone() }.validate().is_err());
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn unmutated_queries_quote_the_memory_and_exclude_their_unit() {
        let memory = generate_corpus(&SyntheticSpec {
            units: 50,
            ..SyntheticSpec::default()
        })
        .unwrap();
        let queries = perturbed_queries(&memory, 20, 0.0, 7).unwrap();
        assert_eq!(queries.len(), 20);
        for q in &queries {
            let uid = q.exclude_uid.expect("sampled queries carry their unit");
            assert_eq!(q.text, memory.source_text(uid));
            assert_eq!(q.domain.as_deref(), Some(memory.domain_name(memory.unit(uid))));
        }
        // Determinism: the same seed draws the same queries.
        let again = perturbed_queries(&memory, 20, 0.0, 7).unwrap();
        assert!(queries.iter().zip(&again).all(|(a, b)| a.text == b.text));
    }

    #[test]
    fn mutation_rewrites_some_tokens_with_in_vocabulary_words() {
        let memory = generate_corpus(&SyntheticSpec {
            units: 50,
            mean_len: 12,
            ..SyntheticSpec::default()
        })
        .unwrap();
        let queries = perturbed_queries(&memory, 30, 0.5, 9).unwrap();
        let changed = queries.iter().any(|q| {
            q.exclude_uid.map(|u| memory.source_text(u)) != Some(q.text.clone())
        });
        assert!(changed, "mutation 0.5 should alter at least one query");
        for q in &queries {
            let sentence = memory.tokenize_query(&q.text);
            assert!(
                sentence.tokens().iter().all(|t| !t.is_unk()),
                "perturbed query `{}` left the vocabulary",
                q.text
            );
        }
    }
}
