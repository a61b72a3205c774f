//! Every acceptance criterion at its stated trial counts and tolerances, one line each.
//! Set `PFCOMP_ACCEPTANCE_OUT` to keep the CSVs and the JSON report.

use std::process::ExitCode;

use pfcomp::acceptance::{run_acceptance_with, AcceptanceOptions};

fn main() -> ExitCode {
    let keep = std::env::var_os("PFCOMP_ACCEPTANCE_OUT").map(std::path::PathBuf::from);
    let scratch = tempfile::tempdir().expect("temporary directory");
    let options = AcceptanceOptions { out: Some(keep.unwrap_or_else(|| scratch.path().to_path_buf())), ..Default::default() };

    println!("\nacceptance (seed {}, scale {})", options.seed, options.scale);
    let report = run_acceptance_with(&options, |c| {
        println!("{}", c.line());
        for r in &c.reports {
            println!(
                "      {:?}: {} measured {:.4e} +/- {:.2e}, bound {:.4e}",
                r.verdict, r.name, r.measured.point, r.measured.ci95, r.bound_value
            );
        }
        for ch in &c.checks {
            let mark = if ch.passed { "ok" } else { "FAILED" };
            if ch.detail.is_empty() {
                println!("      {mark}: {}", ch.name);
            } else {
                println!("      {mark}: {} ({})", ch.name, ch.detail);
            }
        }
    });
    match report {
        Ok(r) if r.passed() && r.criteria.len() == 11 => {
            println!("acceptance: all {} criteria pass\n", r.criteria.len());
            ExitCode::SUCCESS
        }
        Ok(r) => {
            println!("acceptance: FAILED after {} criteria; witness {:?}\n", r.criteria.len(), r.witness);
            ExitCode::FAILURE
        }
        Err(e) => {
            println!("acceptance: error {e}\n");
            ExitCode::FAILURE
        }
    }
}
