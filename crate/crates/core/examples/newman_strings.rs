//! Replacing fresh shared randomness with a small fixed set of seeds: select a set that
//! works for every input, save it, and run with the index sent on the wire.

use pfcomp::protocols::{run_sw1, Mode, ProtocolParams, TrialSeeds};
use pfcomp::randomness::{newman_select, NewmanStrings, Tape, TapeCategory};
use pfcomp::types::{Caps, JointType, Seq};

fn main() -> pfcomp::Result<()> {
    let n = 5;
    let params = ProtocolParams { delta: 0.2, ..ProtocolParams::new(n) };
    let pairs: Vec<(Seq, Seq)> = Seq::all(2, n, &Caps::default())?
        .into_iter()
        .flat_map(|x| Seq::all(2, n, &Caps::default()).unwrap().into_iter().map(move |y| (x.clone(), y)))
        .collect();

    let fails = |i: usize, seed: u64| {
        let (x, y) = &pairs[i];
        let center = JointType::of(&[x, y]).unwrap().to_dist();
        let mode = Mode::Newman(NewmanStrings { strings: vec![seed], certificate: None });
        !run_sw1(x, y, &center, &params, TrialSeeds::new(0, 0), &mode).unwrap().succeeded()
    };
    let s = 64;
    let mut tape = Tape::new(TapeCategory::SharedStructural, 99);
    let set = newman_select(fails, pairs.len(), s, 0.375, &mut tape, 8)?;
    let cert = set.certificate.as_ref().expect("selected sets carry a certificate");
    println!(
        "{} strings, worst input fails on {:.3} of them (target {}), index costs {} bits",
        set.s(),
        cert.worst_fraction,
        cert.target_fraction,
        set.index_bits()
    );

    let saved = set.to_json()?;
    let set = NewmanStrings::from_json(&saved)?;
    let (x, y) = &pairs[300];
    let center = JointType::of(&[x, y])?.to_dist();
    let out = run_sw1(x, y, &center, &params, TrialSeeds::new(1, 0), &Mode::Newman(set))?;
    println!(
        "run: {:?}, {} bits sent, structural charge {} bits",
        out.status,
        out.ledger.communication_bits(),
        out.ledger.shared_structural
    );
    Ok(())
}
