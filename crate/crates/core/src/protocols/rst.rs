//! One-way channel simulation.
//!
//! The sender draws `m` through the channel, checks it, and then replaces it by a
//! candidate `m_r` of the same joint type with her input, chosen from the part of a
//! shared shuffle of `m`'s type class that matches `floor(n R)` shared rate bits. She
//! sends the type and a `ceil(n C)`-bit position prefix; the receiver keeps the
//! candidates that can complete to a channel-typical triple with his input.

use super::estimate::{estimate_from_strings, sampled_input};
use super::wire::{BitReader, Bits};
use super::{
    simulation_rates_saturating, slot_round, AbortEvent, Mode, PartyState, ProtocolOutcome, ProtocolParams, RoundRecord,
    Session, SimulationRates, Status, TrialSeeds,
};
use crate::channel::{Channel, Party};
use crate::error::{Error, Result};
use crate::info::Dist;
use crate::randomness::{random_codebook, OrderedCodebook};
use crate::types::{
    ceil_log2, channel_typical_member_receiver, channel_typical_member_sender, count_width,
    enumerate_type_class_cells, typical_member, Caps, ChannelTypicalSpec, JointType, Seq, TypicalSpec,
};

/// Public description of one simulated message, computed identically by both sides.
#[derive(Clone, Debug)]
pub(crate) struct Step {
    pub spec: ChannelTypicalSpec,
    pub rates: SimulationRates,
    pub rate_bits: u32,
    pub comm_bits: u32,
    /// Send `m_r` symbol by symbol instead of type plus position.
    pub raw: bool,
    pub slot: u64,
    pub n: usize,
}

impl Step {
    /// `center` lives on `S x R`, `channel` takes the flattened `S`.
    pub fn new(params: &ProtocolParams, delta: f64, center: Dist, channel: &Channel, message: usize) -> Result<Self> {
        let channel = channel.flattened();
        let rates = simulation_rates_saturating(params, delta, &center, &channel)?;
        let spec = ChannelTypicalSpec::new(TypicalSpec::new(center, delta)?, channel, params.delta_prime)?;
        let rate_bits = params.rate_bits(rates.r);
        let comm_bits = params.comm_bits(rates.c);
        let mut step = Step { spec, rates, rate_bits, comm_bits, raw: false, slot: slot_round(message), n: params.n };
        step.raw = step.raw_is_cheaper(0);
        Ok(step)
    }

    pub fn type_bits(&self) -> u64 {
        self.spec.channel.output_arity() as u64 * count_width(self.n) as u64
    }

    pub fn raw_bits(&self) -> u64 {
        self.n as u64 * ceil_log2(self.spec.channel.output_arity() as u64) as u64
    }

    /// Whether `extra` header bits plus type and position reach the raw length.
    pub fn raw_is_cheaper(&self, extra: u64) -> bool {
        extra + self.type_bits() + self.comm_bits as u64 >= self.raw_bits()
    }

    fn shuffled_class(&self, t: &JointType, me: &mut PartyState, caps: &Caps) -> Result<OrderedCodebook<Seq>> {
        let class = enumerate_type_class_cells(t, caps)?;
        random_codebook(class, me.structural(self.slot), caps)
    }

    fn rate_filter(&self, book: &OrderedCodebook<Seq>, me: &mut PartyState) -> Result<(OrderedCodebook<Seq>, u32)> {
        let k = self.rate_bits.min(book.index_width());
        let bits = me.rate(self.slot).draw_bits(k as usize);
        Ok((book.prefix_filter(&bits)?, k))
    }
}

/// What the sender did in one step.
#[derive(Clone, Debug)]
pub(crate) struct Sent {
    pub message: Seq,
    pub rate_bits: u32,
    pub position_bits: u32,
}

/// Sender side. `s` is the sender's flattened channel input.
pub(crate) fn send(step: &Step, me: &mut PartyState, s: &Seq, caps: &Caps, out: &mut Bits) -> Result<std::result::Result<Sent, AbortEvent>> {
    let m = step.spec.channel.apply(s, &mut me.private)?;
    if !channel_typical_member_sender(&m, s, &step.spec, caps)? {
        return Ok(Err(AbortEvent::E1));
    }
    let t_m = JointType::empirical(&m);
    let book = step.shuffled_class(&t_m, me, caps)?;
    let (filtered, rate_bits) = step.rate_filter(&book, me)?;
    let target = JointType::of(&[&m, s])?;
    let mut eligible = Vec::new();
    for (i, cand) in filtered.entries().iter().enumerate() {
        if JointType::of(&[cand, s])? == target {
            eligible.push(i);
        }
    }
    if eligible.is_empty() {
        return Ok(Err(AbortEvent::E2));
    }
    let pos = eligible[me.private.uniform_below(eligible.len() as u64) as usize];
    let chosen = filtered.entries()[pos].clone();
    let before = out.len();
    if step.raw {
        out.push_seq(&chosen);
    } else {
        out.push_type(&t_m);
        out.push_bits(&filtered.position_prefix(pos, step.comm_bits));
    }
    Ok(Ok(Sent { message: chosen, rate_bits, position_bits: (out.len() - before) as u32 }))
}

/// Receiver side. `r` is the receiver's flattened side input.
pub(crate) fn receive(step: &Step, me: &mut PartyState, r: &Seq, caps: &Caps, msg: &mut BitReader) -> Result<std::result::Result<Seq, AbortEvent>> {
    let am = step.spec.channel.output_arity();
    if step.raw {
        return Ok(Ok(msg.read_seq(am, step.n)));
    }
    let t_m = msg.read_type(step.n, &[am]);
    let book = step.shuffled_class(&t_m, me, caps)?;
    let (filtered, _) = step.rate_filter(&book, me)?;
    let k = step.comm_bits.min(filtered.index_width());
    let prefix = msg.read_bits(k as usize);
    let mut found = None;
    for cand in filtered.prefix_filter(&prefix)?.into_entries() {
        if channel_typical_member_receiver(&cand, r, &step.spec, caps)? {
            if found.is_some() {
                return Ok(Err(AbortEvent::E4));
            }
            found = Some(cand);
        }
    }
    Ok(found.ok_or(AbortEvent::E3))
}

pub(crate) fn record(step: &Step, message: usize, sent: Option<&Sent>, s: &Seq, r: &Seq) -> Result<RoundRecord> {
    Ok(RoundRecord {
        message,
        r: step.rates.r,
        c: step.rates.c,
        rate_bits: sent.map_or(0, |x| x.rate_bits),
        position_bits: sent.map_or(0, |x| x.position_bits),
        raw: step.raw,
        precondition: typical_member(&[s, r], &step.spec.base)?,
        triple_typical: None,
    })
}

fn check_channel(channel: &Channel, x: &Seq) -> Result<()> {
    if channel.input_arities() != [x.arity()] {
        return Err(Error::AlphabetMismatch(vec![x.arity()], channel.input_arities().to_vec()));
    }
    Ok(())
}

/// Alice appends the simulated message to `out`; Bob parses whatever precedes it with
/// `header`, which also yields his own copy of the step.
fn simulate_one(
    mut session: Session,
    alice_step: &Step,
    mut out: Bits,
    header: impl FnOnce(&mut Session, &mut BitReader) -> Result<Step>,
    estimate: Option<Dist>,
) -> Result<ProtocolOutcome> {
    let caps = session.caps;
    let x = session.alice.input.clone();
    let y = session.bob.input.clone();
    let sent = send(alice_step, &mut session.alice, &x, &caps, &mut out)?;
    let mut rec = record(alice_step, 1, sent.as_ref().ok(), &x, &y)?;
    let sent = match sent {
        Ok(s) => s,
        Err(event) => {
            session.rounds.push(rec);
            return Ok(session.finish(Status::Abort { message: 1, event, detected: true }, vec![], vec![], estimate));
        }
    };
    let msg = session.send(Party::Alice, out);
    let mut reader = msg.reader();
    let bob_step = header(&mut session, &mut reader)?;
    let got = receive(&bob_step, &mut session.bob, &y, &caps, &mut reader)?;
    match got {
        Ok(m) => {
            rec.triple_typical = Some(alice_step.spec.contains_triple(&sent.message, &x, &y)?);
            session.rounds.push(rec);
            Ok(session.finish(Status::Success, vec![sent.message], vec![m], estimate))
        }
        Err(event) => {
            session.rounds.push(rec);
            Ok(session.finish(Status::Abort { message: 1, event, detected: true }, vec![sent.message], vec![], estimate))
        }
    }
}

/// One message from Alice, given a center `t` on `X x Y` known to both.
pub fn run_rst1(
    x: &Seq,
    y: &Seq,
    center: &Dist,
    channel: &Channel,
    params: &ProtocolParams,
    seeds: TrialSeeds,
    mode: &Mode,
) -> Result<ProtocolOutcome> {
    params.validate()?;
    check_channel(channel, x)?;
    if center.arities() != [x.arity(), y.arity()] {
        return Err(Error::AlphabetMismatch(vec![x.arity(), y.arity()], center.arities().to_vec()));
    }
    let step = Step::new(params, params.delta, center.clone(), channel, 1)?;
    let mut session = Session::new(x.clone(), y.clone(), seeds, mode, params.caps)?;
    let mut out = Bits::new();
    session.announce_string(Party::Alice, &mut out);
    simulate_one(
        session,
        &step,
        out,
        |s, r| {
            s.learn_string(Party::Bob, r);
            Step::new(params, params.delta, center.clone(), channel, 1)
        },
        None,
    )
}

/// Two messages: Bob sends his samples; Alice replies with hers plus the simulation on
/// the estimated center.
pub fn run_rst2(x: &Seq, y: &Seq, channel: &Channel, params: &ProtocolParams, seeds: TrialSeeds, mode: &Mode) -> Result<ProtocolOutcome> {
    let m = params.require_m()?;
    check_channel(channel, x)?;
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
    let alice_center = estimate_from_strings(&s_a, &s_b_at_alice)?;
    let alice_step = Step::new(params, params.delta, alice_center.clone(), channel, 1)?;
    let mut out = Bits::new();
    out.push_seq(&s_a);
    let a_arity = x.arity();
    simulate_one(
        session,
        &alice_step,
        out,
        move |_, r| {
            let s_a_at_bob = r.read_seq(a_arity, m);
            Step::new(params, params.delta, estimate_from_strings(&s_a_at_bob, &s_b)?, channel, 1)
        },
        Some(alice_center),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs() -> (Seq, Seq) {
        let x = Seq::new(2, vec![0, 1, 1, 0, 1, 0, 0, 1]).unwrap();
        let y = Seq::new(2, vec![0, 1, 1, 0, 1, 0, 1, 1]).unwrap();
        (x, y)
    }

    #[test]
    fn identity_channel_reproduces_input() {
        let (x, y) = inputs();
        let center = JointType::of(&[&x, &y]).unwrap().to_dist();
        let params = ProtocolParams { delta: 0.15, delta_prime: 0.15, delta_double_prime: 0.15, ..ProtocolParams::new(8) };
        let out = run_rst1(&x, &y, &center, &Channel::identity(2).unwrap(), &params, TrialSeeds::new(1, 1), &Mode::Unbounded)
            .unwrap();
        assert!(out.succeeded(), "{:?}", out.status);
        assert_eq!(out.bob[0], x);
    }

    #[test]
    fn transcripts_agree_on_success() {
        let (x, y) = inputs();
        let center = JointType::of(&[&x, &y]).unwrap().to_dist();
        let params = ProtocolParams { delta: 0.15, delta_prime: 0.15, delta_double_prime: 0.15, ..ProtocolParams::new(8) };
        let ch = Channel::bsc(0.2).unwrap();
        for t in 0..30 {
            let out = run_rst1(&x, &y, &center, &ch, &params, TrialSeeds::new(4, t), &Mode::Unbounded).unwrap();
            if out.succeeded() {
                assert_eq!(out.alice, out.bob);
                assert_eq!(out.ledger.rounds(), 1);
            }
        }
    }

    #[test]
    fn rst2_has_two_rounds() {
        let (x, y) = inputs();
        let params = ProtocolParams {
            delta: 0.15,
            delta_prime: 0.15,
            delta_double_prime: 0.15,
            delta_s: 0.5,
            ..ProtocolParams::new(8)
        };
        let out = run_rst2(&x, &y, &Channel::bsc(0.2).unwrap(), &params, TrialSeeds::new(9, 3), &Mode::Unbounded).unwrap();
        assert!(out.ledger.rounds() >= 1);
        assert!(out.estimate.is_some());
    }
}
