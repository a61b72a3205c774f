//! Simulating a binary symmetric channel on Alice's input with shared randomness, and
//! comparing the law of successful outputs with the exact channel output law.

use pfcomp::channel::{exact_output_distribution, Channel};
use pfcomp::oracles::tv_from_outcomes;
use pfcomp::protocols::{run_rst1, run_rst2, simulation_rates, Mode, ProtocolParams, TrialSeeds};
use pfcomp::types::{Caps, JointType, Seq};
use rayon::prelude::*;

fn main() -> pfcomp::Result<()> {
    let x = Seq::new(2, vec![0, 1, 0, 0, 1, 0, 1, 0])?;
    let y = Seq::new(2, vec![1, 0, 1, 1, 0, 1, 0, 1])?;
    let channel = Channel::bsc(0.2)?;
    let d = 0.15;
    let params = ProtocolParams { delta: d, delta_prime: d, delta_double_prime: d, ..ProtocolParams::new(x.len()) };
    let center = JointType::of(&[&x, &y])?.to_dist();
    let rates = simulation_rates(&params, &center, &channel)?;
    println!("C = {:.3}, R = {:.3} bits/symbol", rates.c, rates.r);

    let trials = 20_000u64;
    let outcomes: Vec<Option<usize>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let o = run_rst1(&x, &y, &center, &channel, &params, TrialSeeds::new(1, t), &Mode::Unbounded)?;
            Ok(o.succeeded().then(|| o.bob[0].index() as usize))
        })
        .collect::<pfcomp::Result<_>>()?;
    let reference: Vec<f64> = exact_output_distribution(&channel, &x, &Caps::default())?.into_iter().map(|(_, p)| p).collect();
    let tv = tv_from_outcomes(&reference, &outcomes)?;
    println!(
        "{} of {trials} runs succeeded; l1 to the exact law {:.3} +/- {:.3}",
        tv.successes, tv.l1.point, tv.l1.ci95
    );

    // With the center estimated from samples instead of given.
    let params2 = ProtocolParams { delta: 0.5, delta_prime: 0.5, delta_double_prime: 0.5, delta_s: 1.0, ..params };
    let ok = (0..500).filter(|&t| {
        run_rst2(&x, &y, &channel, &params2, TrialSeeds::new(2, t), &Mode::Unbounded).is_ok_and(|o| o.succeeded())
    });
    println!("estimated center: {} of 500 runs succeeded", ok.count());
    Ok(())
}
