//! Estimating the joint type of `(x, y)` from `m` shared sample positions.

use super::wire::Bits;
use super::{Mode, PartyState, ProtocolParams, Session, TrialSeeds, SLOT_ESTIMATE};
use crate::channel::Party;
use crate::error::Result;
use crate::info::Dist;
use crate::randomness::{CostLedger, Tape};
use crate::types::{JointType, Seq};

/// `m` positions drawn uniformly (with replacement) from `0..n`.
pub fn sample_positions(n: usize, m: usize, tape: &mut Tape) -> Vec<usize> {
    (0..m).map(|_| tape.uniform_below(n as u64) as usize).collect()
}

/// The joint type of the two sampled strings, as a distribution.
pub fn estimate_from_strings(s_a: &Seq, s_b: &Seq) -> Result<Dist> {
    Ok(JointType::of(&[s_a, s_b])?.to_dist())
}

/// The party's own input read at the shared sample positions.
pub(crate) fn sampled_input(me: &mut PartyState, m: usize) -> Seq {
    let n = me.input.len();
    let positions = sample_positions(n, m, me.structural(SLOT_ESTIMATE));
    let symbols = positions.iter().map(|&i| me.input.symbols()[i]).collect();
    Seq::new(me.input.arity(), symbols).expect("sampled symbols come from a valid sequence")
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateOutcome {
    pub alice: Dist,
    pub bob: Dist,
    pub ledger: CostLedger,
}

/// Two messages: Bob sends his samples, Alice answers with hers.
pub fn estimate_joint_type(x: &Seq, y: &Seq, params: &ProtocolParams, seeds: TrialSeeds, mode: &Mode) -> Result<EstimateOutcome> {
    let m = params.require_m()?;
    let mut session = Session::new(x.clone(), y.clone(), seeds, mode, params.caps)?;

    let mut out = Bits::new();
    session.announce_string(Party::Bob, &mut out);
    let s_b = sampled_input(&mut session.bob, m);
    out.push_seq(&s_b);
    let msg = session.send(Party::Bob, out);

    let mut reader = msg.reader();
    session.learn_string(Party::Alice, &mut reader);
    let s_b_at_alice = reader.read_seq(y.arity(), m);
    let s_a = sampled_input(&mut session.alice, m);
    let alice = estimate_from_strings(&s_a, &s_b_at_alice)?;
    let mut out = Bits::new();
    out.push_seq(&s_a);
    let msg = session.send(Party::Alice, out);

    let s_a_at_bob = msg.reader().read_seq(x.arity(), m);
    let bob = estimate_from_strings(&s_a_at_bob, &s_b)?;
    Ok(EstimateOutcome { alice, bob, ledger: session.ledger() })
}
