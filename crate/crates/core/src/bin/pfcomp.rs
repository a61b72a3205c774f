use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pfcomp::acceptance::{run_acceptance_with, AcceptanceOptions, DEFAULT_SEED};
use pfcomp::experiment::{preset, run_experiment, ExperimentConfig, Family, ModeName, ProtocolName};
use pfcomp::oracles::{dual_formula_check, info_identity_suite, verify_cardinality_suite};
use pfcomp::types::Caps;

#[derive(Parser)]
#[command(name = "pfcomp", version, about = "Run compression and simulation experiments and their checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive type-class cardinality sweep, information identities and the rate-formula cross-check.
    VerifyTypes {
        /// Largest n for binary x binary.
        #[arg(long, default_value_t = 8)]
        n_binary: usize,
        /// Largest n for binary x ternary.
        #[arg(long, default_value_t = 6)]
        n_ternary: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Joint-type estimation from sampled positions.
    Estimate(RunArgs),
    /// One-way coding with side information (sw1, sw2, sw3).
    SlepianWolf(RunArgs),
    /// One-way channel simulation (rst1, rst2).
    ReverseShannon(RunArgs),
    /// Interactive simulation (int2, int3).
    Interactive(RunArgs),
    /// The full acceptance suite; exits non-zero on any non-vacuous failure.
    Acceptance {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Multiplier on every trial count.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Run only these criteria (repeatable).
        #[arg(long)]
        only: Vec<u32>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; without it a built-in preset is used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset protocol when no config is given.
    #[arg(long, value_enum)]
    protocol: Option<ProtocolArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ProtocolArg {
    Estimate,
    Sw1,
    Sw2,
    Sw3,
    Rst1,
    Rst2,
    Int2,
    Int3,
}

impl From<ProtocolArg> for ProtocolName {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Estimate => ProtocolName::Estimate,
            ProtocolArg::Sw1 => ProtocolName::Sw1,
            ProtocolArg::Sw2 => ProtocolName::Sw2,
            ProtocolArg::Sw3 => ProtocolName::Sw3,
            ProtocolArg::Rst1 => ProtocolName::Rst1,
            ProtocolArg::Rst2 => ProtocolName::Rst2,
            ProtocolArg::Int2 => ProtocolName::Int2,
            ProtocolArg::Int3 => ProtocolName::Int3,
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Unbounded,
    Newman,
}

fn experiment(family: Family, default: ProtocolName, args: RunArgs) -> pfcomp::Result<bool> {
    let mut config = match (&args.config, args.protocol) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(p)) => preset(p.into()),
        (None, None) => preset(default),
    };
    if config.protocol.family() != family {
        return Err(pfcomp::Error::Config(format!(
            "protocol: {} does not belong to this subcommand",
            config.protocol.as_str()
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(out) = args.out {
        config.out = Some(out);
    }
    if let Some(mode) = args.mode {
        config.mode = match mode {
            ModeArg::Unbounded => ModeName::Unbounded,
            ModeArg::Newman => ModeName::Newman,
        };
        if config.mode == ModeName::Unbounded {
            config.newman_strings = None;
        }
    }
    let out = run_experiment(&config)?;
    let r = &out.summary.results;
    println!("{}: {} trials, {} successes", config.protocol.as_str(), r.trials, r.successes);
    if let Some(cc) = r.mean_cc_per_n {
        println!("mean CC/n {cc:.4}, mean SR/n {:.4}", r.mean_sr_per_n.unwrap_or(0.0));
    }
    for rep in &r.reports {
        println!("{:?} {} (bound {:.4e}, measured {:.4e})", rep.verdict, rep.name, rep.bound_value, rep.measured.point);
    }
    if let (Some(csv), Some(summary)) = (&out.csv, &out.summary_path) {
        println!("wrote {} and {}", csv.display(), summary.display());
    }
    Ok(!out.failed())
}

fn verify_types(n_binary: usize, n_ternary: usize, seed: u64, out: Option<PathBuf>) -> pfcomp::Result<bool> {
    let cards = verify_cardinality_suite(&[(n_binary, 2, 2), (n_ternary, 2, 3)], &Caps::default())?;
    println!("cardinalities: {} checks, {} violations", cards.checks, cards.violations.len());
    for v in cards.violations.iter().take(10) {
        println!("  {} at {}: log2 size {:.3} not in [{:.3}, {:.3}]", v.check, v.witness, v.log2_size, v.log2_lower, v.log2_upper);
    }
    let ids = info_identity_suite(1000, seed)?;
    println!(
        "identities on {} instances: chain {:.1e}, symmetry {:.1e}, pinsker {:.1e}, continuity {:.1e}",
        ids.instances, ids.chain_rule, ids.symmetry, ids.pinsker, ids.continuity
    );
    let dual = dual_formula_check(100, seed)?;
    println!("rate formulas: max abs difference {:.1e} over {} instances", dual.max_abs_diff, dual.instances - dual.skipped);
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)?;
        let json = serde_json::json!({ "cardinalities": cards, "identities": ids, "rate_formulas": dual });
        std::fs::write(dir.join("verify-types.json"), serde_json::to_string_pretty(&json)?)?;
    }
    Ok(cards.violations.is_empty() && ids.holds(1e-9) && dual.max_abs_diff < 1e-9)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::VerifyTypes { n_binary, n_ternary, seed, out } => verify_types(n_binary, n_ternary, seed, out),
        Command::Estimate(a) => experiment(Family::Estimate, ProtocolName::Estimate, a),
        Command::SlepianWolf(a) => experiment(Family::SlepianWolf, ProtocolName::Sw1, a),
        Command::ReverseShannon(a) => experiment(Family::ReverseShannon, ProtocolName::Rst1, a),
        Command::Interactive(a) => experiment(Family::Interactive, ProtocolName::Int2, a),
        Command::Acceptance { seed, out, scale, only } => {
            let options = AcceptanceOptions { seed, scale, out, only };
            run_acceptance_with(&options, |c| {
                println!("{}", c.line());
                for ch in c.checks.iter().filter(|ch| !ch.passed) {
                    println!("    failed: {} ({})", ch.name, ch.detail);
                }
            })
            .map(|r| r.passed())
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
