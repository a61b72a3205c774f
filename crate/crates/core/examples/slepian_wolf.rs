//! Alice sends x to Bob, who holds correlated y, in the three side-information
//! settings: a known center, an estimated center, and y produced by a known channel.

use pfcomp::channel::Channel;
use pfcomp::protocols::{run_sw1, run_sw2, run_sw3, sw_rate, Mode, ProtocolOutcome, ProtocolParams, TrialSeeds};
use pfcomp::types::{JointType, Seq};

fn show(name: &str, outcomes: &[ProtocolOutcome], x: &Seq) {
    let ok = outcomes.iter().filter(|o| o.succeeded() && o.bob[0] == *x).count();
    let bits: u64 = outcomes.iter().map(|o| o.ledger.communication_bits()).max().unwrap_or(0);
    println!("{name}: {ok}/{} decoded, at most {bits} bits sent (raw x is {} bits)", outcomes.len(), x.len());
}

fn main() -> pfcomp::Result<()> {
    let x = Seq::new(2, vec![0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 1, 1])?;
    let y = Seq::new(2, vec![0, 1, 1, 0, 1, 0, 0, 1, 0, 0, 1, 1])?;
    let n = x.len();
    let params = ProtocolParams { delta: 0.5, delta_s: 0.5, ..ProtocolParams::new(n) };
    let center = JointType::of(&[&x, &y])?.to_dist();
    println!("rate on the exact type: {:.3} bits/symbol", sw_rate(&params, &center)?);

    let trials = 50;
    let mode = Mode::Unbounded;
    let run = |f: &dyn Fn(TrialSeeds) -> pfcomp::Result<ProtocolOutcome>| -> pfcomp::Result<Vec<ProtocolOutcome>> {
        (0..trials).map(|t| f(TrialSeeds::new(5, t))).collect()
    };

    show("known center", &run(&|s| run_sw1(&x, &y, &center, &params, s, &mode))?, &x);
    show("estimated center", &run(&|s| run_sw2(&x, &y, &params, s, &mode))?, &x);
    let bsc = Channel::bsc(0.1)?;
    show("channel side information", &run(&|s| run_sw3(&x, &y, &bsc, &params, s, &mode))?, &x);
    Ok(())
}
