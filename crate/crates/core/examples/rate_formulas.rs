//! Rates and slack terms for one instance, and the check that the closed-form rate
//! formulas agree with a direct evaluation on random instances.

use pfcomp::channel::Channel;
use pfcomp::info::Dist;
use pfcomp::oracles::dual_formula_check;
use pfcomp::protocols::{rate_bounds, simulation_failure_bound, ProtocolParams};

fn main() -> pfcomp::Result<()> {
    let center = Dist::new(vec![2, 2], vec![0.4, 0.1, 0.1, 0.4])?;
    let channel = Channel::bsc(0.2)?;
    for n in [100, 1_000, 10_000, 100_000] {
        let params = ProtocolParams { delta: 0.01, delta_prime: 0.01, delta_double_prime: 0.01, ..ProtocolParams::new(n) };
        let b = rate_bounds(&params, &center, &channel)?;
        let fail = simulation_failure_bound(n, b.delta_min).map_or("-".to_string(), |f| format!("{f:.3e}"));
        println!(
            "n = {n:>6}: C_sw {:.3}  eta1 {:.3}  R {:.3}  C {:.3}  eta2 {:.3}  failure bound {fail}",
            b.c_sw, b.eta1, b.r, b.c, b.eta2
        );
    }
    let dual = dual_formula_check(200, 7)?;
    println!("formula cross-check: max |difference| {:.2e} over {} instances", dual.max_abs_diff, dual.instances - dual.skipped);
    Ok(())
}
