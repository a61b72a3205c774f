//! Two parties estimate the joint type of their inputs by exchanging symbols at shared
//! random positions.

use pfcomp::protocols::{estimate_joint_type, estimation_failure_bound, Mode, ProtocolParams, TrialSeeds};
use pfcomp::types::{JointType, Seq};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pfcomp::Result<()> {
    let n = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
    let y: Vec<usize> = x.iter().map(|&b| if rng.gen_bool(0.15) { 1 - b } else { b }).collect();
    let (x, y) = (Seq::new(2, x)?, Seq::new(2, y)?);
    let truth = JointType::of(&[&x, &y])?.to_dist();

    let params = ProtocolParams { delta: 0.1, delta_s: 0.2, ..ProtocolParams::new(n) };
    let trials = 200;
    let mut misses = 0;
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let out = estimate_joint_type(&x, &y, &params, TrialSeeds::new(11, trial), &Mode::Unbounded)?;
        assert_eq!(out.alice, out.bob);
        let err = out.alice.probs().iter().zip(truth.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
        if err > params.delta {
            misses += 1;
        }
        if trial == 0 {
            println!("sent {} bits using {} shared bits", out.ledger.communication_bits(), out.ledger.shared_structural);
        }
    }
    let bound = estimation_failure_bound(params.m(), params.delta, 2, 2);
    println!("{misses}/{trials} estimates with a cell off by more than {}; bound {bound:.4}; worst cell deviation {worst:.4}", params.delta);
    Ok(())
}
