//! Experiment runner: reads a `key = value` experiment file, generates
//! the synthetic corpus, and prints results as one JSON document followed
//! by aligned text tables.
//!
//! ```text
//! tmr-bench experiment.conf
//! ```

use std::fs;
use std::process::ExitCode;

use serde::Serialize;

use tmr_bench::{
    compare_strategies, generate_corpus, perturbed_queries, survivor_quartiles, timing_sweep,
    Comparison, ExperimentConfig, ExperimentMode, TimingTable,
};
use tmr_core::IndexBundle;

#[derive(Serialize)]
struct Report {
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing: Option<TimingTable>,
}

fn run(config_path: &str) -> Result<(), String> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| format!("cannot read `{config_path}`: {e}"))?;
    let cfg: ExperimentConfig = text.parse()?;

    let mut report = Report {
        comparison: None,
        timing: None,
    };
    if matches!(cfg.mode, ExperimentMode::Compare | ExperimentMode::Both) {
        let memory = generate_corpus(&cfg.spec()).map_err(|e| e.to_string())?;
        let bundle = IndexBundle::build(memory, cfg.prune);
        let queries = perturbed_queries(bundle.memory(), cfg.queries, cfg.mutation, cfg.seed + 1)
            .map_err(|e| e.to_string())?;
        let configs = cfg.strategy_configs()?;
        let strategies =
            compare_strategies(&bundle, &queries, &configs).map_err(|e| e.to_string())?;
        let survivors = survivor_quartiles(&bundle, &queries, &cfg.taus, cfg.min_len);
        report.comparison = Some(Comparison { strategies, survivors });
    }
    if matches!(cfg.mode, ExperimentMode::Timing | ExperimentMode::Both) {
        let configs = cfg.strategy_configs()?;
        let (_, timing_config) = configs
            .first()
            .ok_or_else(|| "timing mode needs at least one strategy".to_string())?;
        let table = timing_sweep(
            &cfg.spec(),
            &cfg.sizes,
            cfg.timing_queries,
            cfg.mutation,
            timing_config,
            cfg.prune,
        )
        .map_err(|e| e.to_string())?;
        report.timing = Some(table);
    }

    println!(
        "{}",
        serde_json::to_string(&report).expect("report serializes")
    );
    if let Some(comparison) = &report.comparison {
        println!();
        print!("{}", comparison.render_text());
    }
    if let Some(timing) = &report.timing {
        println!();
        print!("{}", timing.render_text());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = match args.as_slice() {
        [path] => path,
        _ => {
            eprintln!("usage: tmr-bench <experiment-file>");
            return ExitCode::from(2);
        }
    };
    match run(path) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("tmr-bench: {msg}");
            ExitCode::from(2)
        }
    }
}
