//! A two-round protocol (Alice speaks, then Bob answers depending on her message)
//! simulated with the two-message and three-message compressions.

use pfcomp::channel::{exact_transcript_distribution, information_complexity, prior_free_ic_over_types, Channel, InteractiveSpec};
use pfcomp::oracles::tv_from_outcomes;
use pfcomp::protocols::{run_int2, run_int3, Mode, ProtocolParams, TrialSeeds};
use pfcomp::types::{Caps, JointType, Seq};
use rayon::prelude::*;

fn main() -> pfcomp::Result<()> {
    let first = Channel::bsc(0.2)?;
    let second = Channel::on_first(&Channel::bsc(0.3)?, &[2])?;
    let spec = InteractiveSpec::new(2, 2, vec![first, second])?;

    let x = Seq::new(2, vec![0, 0, 1, 0, 0, 0])?;
    let y = Seq::new(2, vec![0, 0, 0, 0, 1, 0])?;
    let t = JointType::of(&[&x, &y])?.to_dist();
    println!("information cost at the input type: {:.4}", information_complexity(&t, &spec)?);
    let (ic, argmax) = prior_free_ic_over_types(&spec, 6, &Caps::default())?;
    println!("largest over types with n = 6: {ic:.4} at {:?}", argmax.counts());

    let r = 0.5;
    let params = ProtocolParams { delta: r, delta_prime: r, delta_double_prime: r, delta_s: 0.5, ..ProtocolParams::new(6) };
    let exact = exact_transcript_distribution(&spec, &x, &y, &Caps::default())?;
    for (name, three) in [("int2", false), ("int3", true)] {
        let runs: Vec<_> = (0..10_000u64)
            .into_par_iter()
            .map(|k| {
                let seeds = TrialSeeds::new(4, k);
                if three {
                    run_int3(&x, &y, &spec, &params, seeds, &Mode::Unbounded)
                } else {
                    run_int2(&x, &y, &spec, &params, seeds, &Mode::Unbounded)
                }
            })
            .collect::<pfcomp::Result<_>>()?;
        let outcomes: Vec<Option<usize>> = runs.iter().map(|o| o.transcript().map(|tr| exact.index_of(tr))).collect();
        let tv = tv_from_outcomes(&exact.probs, &outcomes)?;
        let rounds = runs.iter().map(|o| o.ledger.rounds()).max().unwrap_or(0);
        let bits = runs.iter().map(|o| o.ledger.communication_bits()).max().unwrap_or(0);
        println!(
            "{name}: {} successes, {rounds} rounds, <= {bits} bits, l1 {:.3} +/- {:.3}",
            tv.successes, tv.l1.point, tv.l1.ci95
        );
    }
    Ok(())
}
