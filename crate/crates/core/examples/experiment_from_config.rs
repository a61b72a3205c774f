//! Runs an experiment described by a JSON config and prints the per-trial CSV and the
//! summary. Usage: `cargo run --example experiment_from_config -- configs/sw1_coupled.json`.

use pfcomp::experiment::{preset, run_trials, summarize, write_csv, ExperimentConfig, ProtocolName};

fn main() -> pfcomp::Result<()> {
    let mut config = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => preset(ProtocolName::Sw1),
    };
    config.trials = config.trials.min(20);
    let records = run_trials(&config)?;
    write_csv(&config, &records, std::io::stdout().lock())?;
    let summary = summarize(&config, &records)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
