//! Experiment harness for the retrieval engine: seeded synthetic corpora,
//! side-by-side strategy comparisons, and latency sweeps across corpus
//! sizes. Everything except wall-clock measurements is deterministic
//! given the seeds, so experiment outputs diff cleanly between runs.

pub mod compare;
pub mod config;
pub mod synth;
pub mod table;
pub mod timing;

pub use compare::{compare_strategies, survivor_quartiles, Comparison, Quartiles, StrategyOutcome};
pub use config::{ExperimentConfig, ExperimentMode};
pub use synth::{generate_corpus, perturbed_queries, BenchQuery, SyntheticSpec};
pub use timing::{timing_sweep, SizeTimings, StageExponents, TimingTable};
