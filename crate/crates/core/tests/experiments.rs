//! Config files, output bytes and the command-line front end.

use std::path::{Path, PathBuf};
use std::process::Command;

use pfcomp::experiment::{run_experiment, run_trials, write_csv, ExperimentConfig, Summary, SUMMARY_SCHEMA_VERSION};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn shipped_configs() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
}

fn csv_bytes(config: &ExperimentConfig) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(config, &run_trials(config).unwrap(), &mut buf).unwrap();
    buf
}

#[test]
fn shipped_configs_load_and_round_trip() {
    let paths = shipped_configs();
    assert!(paths.len() >= 8);
    for path in paths {
        let config = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = ExperimentConfig::from_json(&serde_json::to_string(&config).unwrap()).unwrap();
        assert_eq!(config, again, "{}", path.display());
    }
}

#[test]
fn output_bytes_do_not_depend_on_thread_count() {
    for path in shipped_configs() {
        let mut config = ExperimentConfig::load(&path).unwrap();
        config.trials = 40;
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| csv_bytes(&config));
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| csv_bytes(&config));
        assert_eq!(one, many, "{}", path.display());
        config.seed += 1;
        assert_ne!(one, csv_bytes(&config), "{}: seed has no effect", path.display());
    }
}

#[test]
fn summary_differs_between_runs_only_in_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig::load(&configs_dir().join("sw1_coupled.json")).unwrap();
    config.trials = 30;
    let mut run = |sub: &str| {
        config.out = Some(dir.path().join(sub));
        let out = run_experiment(&config).unwrap();
        config.out = None;
        out
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(std::fs::read(a.csv.unwrap()).unwrap(), std::fs::read(b.csv.unwrap()).unwrap());
    let read = |p: PathBuf| -> Summary { serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap() };
    let (sa, sb) = (read(a.summary_path.unwrap()), read(b.summary_path.unwrap()));
    assert_eq!(sa.schema_version, SUMMARY_SCHEMA_VERSION);
    assert_eq!(serde_json::to_value(&sa.results).unwrap(), serde_json::to_value(&sb.results).unwrap());
    assert_eq!(sa.metadata.config.out.as_deref(), Some(dir.path().join("a").as_path()));
    assert_eq!(sa.metadata.config.seed, sb.metadata.config.seed);
}

fn pfcomp(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pfcomp")).args(args).output().unwrap()
}

#[test]
fn cli_runs_a_config_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs_dir().join("rst1_bsc.json");
    let out = dir.path().to_str().unwrap();
    let run = pfcomp(&["reverse-shannon", "--config", config.to_str().unwrap(), "--trials", "25", "--seed", "3", "--out", out]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(dir.path().join("rst1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 26);
    assert!(csv.lines().nth(1).unwrap().starts_with("0,rst1,3,"));
    let summary: Summary = serde_json::from_slice(&std::fs::read(dir.path().join("rst1.summary.json")).unwrap()).unwrap();
    assert_eq!(summary.results.trials, 25);
}

#[test]
fn cli_newman_mode_and_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = pfcomp(&["slepian-wolf", "--protocol", "sw1", "--trials", "10", "--mode", "newman", "--out", out]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sw1.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[10], "10", "structural charge is the index width of 1024 strings: {line}");
    }
}

#[test]
fn cli_rejects_bad_input_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"protocol":"sw1","x_arity":2,"y_arity":2,"inputs":{"law":"fixed","x":[0],"y":[1]},"params":{"n":1},"trials":1,"seed":0,"colour":"red"}"#).unwrap();
    let run = pfcomp(&["slepian-wolf", "--config", bad.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("colour"));

    let wrong_family = configs_dir().join("rst1_bsc.json");
    let run = pfcomp(&["slepian-wolf", "--config", wrong_family.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn cli_verify_types_writes_its_report() {
    let dir = tempfile::tempdir().unwrap();
    let run = pfcomp(&["verify-types", "--n-binary", "5", "--n-ternary", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stdout));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("verify-types.json")).unwrap()).unwrap();
    assert_eq!(report["cardinalities"]["violations"].as_array().unwrap().len(), 0);
}
