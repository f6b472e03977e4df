//! Plain `key = value` experiment configuration. One file describes the
//! synthetic corpus, the query sample, which retrieval strategies to
//! compare, and the sizes of the latency sweep.

use std::str::FromStr;

use tmr_core::pipeline::{DomainPolicy, FilterSpec, RankerSpec};
use tmr_core::{EditCosts, Ratio, RetrievalConfig};

use crate::synth::SyntheticSpec;

/// Which sections of the experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentMode {
    Compare,
    Timing,
    Both,
}

/// Everything an experiment file may set, all optional, each with the
/// default below.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: ExperimentMode,
    pub units: usize,
    pub vocabulary: u32,
    pub mean_len: usize,
    pub repetition: f64,
    pub domains: u16,
    pub seed: u64,
    pub queries: usize,
    pub mutation: f64,
    pub k: usize,
    /// Threshold used by the `ngm-led` strategy.
    pub tau: Ratio,
    /// Threshold grid for the survivor-count summary.
    pub taus: Vec<Ratio>,
    pub min_len: u32,
    /// Candidate cap for the `bm25` strategy.
    pub cap: usize,
    /// Deletion cost for the `dlcs` strategy.
    pub delta: Ratio,
    /// Penalty strength for the `contrast` strategy.
    pub alpha: f64,
    pub strategies: Vec<String>,
    /// Corpus sizes for the timing sweep.
    pub sizes: Vec<usize>,
    pub timing_queries: usize,
    /// Percentage of most-frequent terms dropped from the inverted index.
    pub prune: Ratio,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: ExperimentMode::Compare,
            units: 20_000,
            vocabulary: 5_000,
            mean_len: 10,
            repetition: 0.3,
            domains: 4,
            seed: 42,
            queries: 200,
            mutation: 0.2,
            k: 3,
            tau: Ratio::new(3, 10),
            taus: vec![
                Ratio::new(1, 5),
                Ratio::new(3, 10),
                Ratio::new(2, 5),
                Ratio::new(1, 2),
            ],
            min_len: 3,
            cap: 100,
            delta: Ratio::new(1, 10),
            alpha: 0.3,
            strategies: ["led", "dlcs", "ngm-led", "bm25", "contrast"]
                .map(String::from)
                .to_vec(),
            sizes: vec![10_000, 100_000, 1_000_000],
            timing_queries: 25,
            prune: Ratio::new(2, 1),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("line {line}: bad value for `{key}`: {e}"))
}

fn parse_list<T: FromStr>(key: &str, value: &str, line: usize) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(|part| parse(key, part.trim(), line)).collect()
}

impl FromStr for ExperimentConfig {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(format!("line {line}: expected `key = value`, got `{content}`"));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "mode" => {
                    cfg.mode = match value {
                        "compare" => ExperimentMode::Compare,
                        "timing" => ExperimentMode::Timing,
                        "both" => ExperimentMode::Both,
                        other => {
                            return Err(format!(
                                "line {line}: mode must be compare, timing, or both, got `{other}`"
                            ))
                        }
                    }
                }
                "units" => cfg.units = parse(key, value, line)?,
                "vocabulary" => cfg.vocabulary = parse(key, value, line)?,
                "mean_len" => cfg.mean_len = parse(key, value, line)?,
                "repetition" => cfg.repetition = parse(key, value, line)?,
                "domains" => cfg.domains = parse(key, value, line)?,
                "seed" => cfg.seed = parse(key, value, line)?,
                "queries" => cfg.queries = parse(key, value, line)?,
                "mutation" => cfg.mutation = parse(key, value, line)?,
                "k" => cfg.k = parse(key, value, line)?,
                "tau" => cfg.tau = parse(key, value, line)?,
                "taus" => cfg.taus = parse_list(key, value, line)?,
                "min_len" => cfg.min_len = parse(key, value, line)?,
                "cap" => cfg.cap = parse(key, value, line)?,
                "delta" => cfg.delta = parse(key, value, line)?,
                "alpha" => cfg.alpha = parse(key, value, line)?,
                "strategies" => {
                    cfg.strategies = value.split(',').map(|s| s.trim().to_string()).collect()
                }
                "sizes" => cfg.sizes = parse_list(key, value, line)?,
                "timing_queries" => cfg.timing_queries = parse(key, value, line)?,
                "prune" => cfg.prune = parse(key, value, line)?,
                other => return Err(format!("line {line}: unknown key `{other}`")),
            }
        }
        Ok(cfg)
    }
}

impl ExperimentConfig {
    /// The synthetic corpus this experiment runs on.
    pub fn spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            units: self.units,
            vocabulary: self.vocabulary,
            mean_len: self.mean_len,
            repetition: self.repetition,
            domains: self.domains,
            seed: self.seed,
        }
    }

    /// Expands the strategy names into named retrieval configurations.
    pub fn strategy_configs(&self) -> Result<Vec<(String, RetrievalConfig)>, String> {
        self.strategies
            .iter()
            .map(|name| {
                let base = RetrievalConfig {
                    domain: DomainPolicy::All,
                    filter: FilterSpec::None,
                    ranker: RankerSpec::Edit(EditCosts::led()),
                    contrast: None,
                    k: self.k,
                };
                let config = match name.as_str() {
                    "led" => base,
                    "lcs" => RetrievalConfig {
                        ranker: RankerSpec::Edit(EditCosts::lcs()),
                        ..base
                    },
                    "dlcs" => RetrievalConfig {
                        ranker: RankerSpec::Edit(
                            EditCosts::delta_lcs(self.delta).map_err(|e| e.to_string())?,
                        ),
                        ..base
                    },
                    "ngm-led" => RetrievalConfig {
                        filter: FilterSpec::Ngm {
                            tau: self.tau,
                            min_len: self.min_len,
                        },
                        ..base
                    },
                    "bm25" => RetrievalConfig {
                        filter: FilterSpec::Bm25 { cap: self.cap },
                        ranker: RankerSpec::Bm25,
                        ..base
                    },
                    "contrast" => RetrievalConfig {
                        contrast: Some(self.alpha),
                        ..base
                    },
                    other => {
                        return Err(format!(
                            "unknown strategy `{other}` (expected led, lcs, dlcs, ngm-led, bm25, or contrast)"
                        ))
                    }
                };
                Ok((name.clone(), config))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_the_defaults() {
        let cfg: ExperimentConfig = "".parse().unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.mode, ExperimentMode::Compare);
        assert_eq!(cfg.sizes, vec![10_000, 100_000, 1_000_000]);
    }

    #[test]
    fn keys_comments_and_lists_parse() {
        let text = "\
# synthetic corpus
mode = both
units = 500   # inline comment
vocabulary=300
repetition = 0.5
taus = 0.2, 0.3, 0.5
strategies = led, bm25
sizes = 100,1000,10000
delta = 0.25
";
        let cfg: ExperimentConfig = text.parse().unwrap();
        assert_eq!(cfg.mode, ExperimentMode::Both);
        assert_eq!(cfg.units, 500);
        assert_eq!(cfg.vocabulary, 300);
        assert_eq!(cfg.repetition, 0.5);
        assert_eq!(cfg.taus, vec![Ratio::new(1, 5), Ratio::new(3, 10), Ratio::new(1, 2)]);
        assert_eq!(cfg.strategies, vec!["led".to_string(), "bm25".to_string()]);
        assert_eq!(cfg.sizes, vec![100, 1000, 10000]);
        assert_eq!(cfg.delta, Ratio::new(1, 4));
    }

    #[test]
    fn unknown_keys_bad_values_and_bad_shapes_are_errors() {
        let err = "wibble = 3".parse::<ExperimentConfig>().unwrap_err();
        assert!(err.contains("unknown key `wibble`"), "{err}");
        let err = "units = many".parse::<ExperimentConfig>().unwrap_err();
        assert!(err.contains("bad value for `units`"), "{err}");
        let err = "just a line".parse::<ExperimentConfig>().unwrap_err();
        assert!(err.contains("expected `key = value`"), "{err}");
        let err = "mode = fast".parse::<ExperimentConfig>().unwrap_err();
        assert!(err.contains("mode must be"), "{err}");
    }

    #[test]
    fn strategy_names_expand_to_configs_sharing_k() {
        let cfg = ExperimentConfig { k: 5, ..ExperimentConfig::default() };
        let configs = cfg.strategy_configs().unwrap();
        assert_eq!(configs.len(), 5);
        assert!(configs.iter().all(|(_, c)| c.k == 5));
        assert!(matches!(configs[2].1.filter, FilterSpec::Ngm { .. }));
        assert!(matches!(configs[3].1.ranker, RankerSpec::Bm25));
        assert_eq!(configs[4].1.contrast, Some(0.3));

        let bad = ExperimentConfig {
            strategies: vec!["led".into(), "zigzag".into()],
            ..ExperimentConfig::default()
        };
        let err = bad.strategy_configs().unwrap_err();
        assert!(err.contains("unknown strategy `zigzag`"), "{err}");
    }
}
