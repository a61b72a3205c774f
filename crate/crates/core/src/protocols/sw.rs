//! One-way coding of `x` for a receiver holding side information `y`.
//!
//! Alice and Bob shuffle `X^n` with shared structural bits. Alice sends the first
//! `ceil(n C)` bits of her input's position; Bob keeps the candidates with that prefix
//! that are jointly typical with `y`.

use super::estimate::{estimate_from_strings, sampled_input};
use super::wire::{BitReader, Bits};
use super::{
    slot_round, sw_rate, AbortEvent, Mode, PartyState, ProtocolOutcome, ProtocolParams, RoundRecord, Session, Status,
    TrialSeeds,
};
use crate::channel::{Channel, Party};
use crate::error::{Error, Result};
use crate::info::Dist;
use crate::randomness::{random_codebook, OrderedCodebook};
use crate::types::{ceil_log2, typical_member, Caps, JointType, Seq, TypicalSpec};

fn codebook(me: &mut PartyState, arity: usize, n: usize, caps: &Caps) -> Result<OrderedCodebook<Seq>> {
    let universe = Seq::all(arity, n, caps)?;
    random_codebook(universe, me.structural(slot_round(1)), caps)
}

fn encode(me: &mut PartyState, comm_bits: u32, caps: &Caps, out: &mut Bits) -> Result<u32> {
    let book = codebook(me, me.input.arity(), me.input.len(), caps)?;
    let pos = book.position_of(&me.input).expect("the codebook holds every sequence");
    let k = comm_bits.min(book.index_width());
    out.push_bits(&book.position_prefix(pos, k));
    Ok(k)
}

fn decode<F>(
    me: &mut PartyState,
    arity: usize,
    comm_bits: u32,
    caps: &Caps,
    msg: &mut BitReader,
    accept: F,
) -> Result<std::result::Result<Seq, AbortEvent>>
where
    F: Fn(&Seq) -> Result<bool>,
{
    let book = codebook(me, arity, me.input.len(), caps)?;
    let k = comm_bits.min(book.index_width());
    let prefix = msg.read_bits(k as usize);
    let mut found = None;
    for cand in book.prefix_filter(&prefix)?.into_entries() {
        if accept(&cand)? {
            if found.is_some() {
                return Ok(Err(AbortEvent::E4));
            }
            found = Some(cand);
        }
    }
    Ok(found.ok_or(AbortEvent::E3))
}

fn two_coords(center: &Dist, x: &Seq, y: &Seq) -> Result<()> {
    if center.arities() != [x.arity(), y.arity()] {
        return Err(Error::AlphabetMismatch(vec![x.arity(), y.arity()], center.arities().to_vec()));
    }
    Ok(())
}

fn outcome(session: Session, decoded: std::result::Result<Seq, AbortEvent>, x: &Seq, estimate: Option<Dist>) -> ProtocolOutcome {
    match decoded {
        Ok(xh) => session.finish(Status::Success, vec![x.clone()], vec![xh], estimate),
        Err(event) => {
            session.finish(Status::Abort { message: 1, event, detected: true }, vec![x.clone()], vec![], estimate)
        }
    }
}

fn record(params: &ProtocolParams, c: f64, position_bits: u32, precondition: bool) -> RoundRecord {
    RoundRecord {
        message: 1,
        r: 0.0,
        c: params.c_override.unwrap_or(c),
        rate_bits: 0,
        position_bits,
        raw: false,
        precondition,
        triple_typical: None,
    }
}

/// One message from Alice, given a center `t` on `X x Y` known to both.
pub fn run_sw1(x: &Seq, y: &Seq, center: &Dist, params: &ProtocolParams, seeds: TrialSeeds, mode: &Mode) -> Result<ProtocolOutcome> {
    params.validate()?;
    two_coords(center, x, y)?;
    let spec = TypicalSpec::new(center.clone(), params.delta)?;
    let c = sw_rate(params, center)?;
    let comm_bits = params.comm_bits(c);
    let caps = params.caps;
    let mut session = Session::new(x.clone(), y.clone(), seeds, mode, caps)?;

    let mut out = Bits::new();
    session.announce_string(Party::Alice, &mut out);
    let k = encode(&mut session.alice, comm_bits, &caps, &mut out)?;
    let msg = session.send(Party::Alice, out);

    let mut reader = msg.reader();
    session.learn_string(Party::Bob, &mut reader);
    let y_own = session.bob.input.clone();
    let decoded = decode(&mut session.bob, x.arity(), comm_bits, &caps, &mut reader, |cand| {
        typical_member(&[cand, &y_own], &spec)
    })?;
    session.rounds.push(record(params, c, k, typical_member(&[x, y], &spec)?));
    Ok(outcome(session, decoded, x, None))
}

/// Bits of the first message of [`run_sw2`].
pub fn sw2_round1_bits(params: &ProtocolParams, y_arity: usize, strings: Option<usize>) -> u64 {
    params.m() as u64 * ceil_log2(y_arity as u64) as u64 + strings.map_or(0, |s| ceil_log2(s as u64) as u64)
}

/// Two messages: Bob sends his samples, Alice replies with hers plus the one-way code
/// on the estimated center.
pub fn run_sw2(x: &Seq, y: &Seq, params: &ProtocolParams, seeds: TrialSeeds, mode: &Mode) -> Result<ProtocolOutcome> {
    let m = params.require_m()?;
    let caps = params.caps;
    let mut session = Session::new(x.clone(), y.clone(), seeds, mode, caps)?;

    let mut out = Bits::new();
    session.announce_string(Party::Bob, &mut out);
    let s_b = sampled_input(&mut session.bob, m);
    out.push_seq(&s_b);
    let msg = session.send(Party::Bob, out);

    let mut reader = msg.reader();
    session.learn_string(Party::Alice, &mut reader);
    let s_b_at_alice = reader.read_seq(y.arity(), m);
    let s_a = sampled_input(&mut session.alice, m);
    let center = estimate_from_strings(&s_a, &s_b_at_alice)?;
    let c = sw_rate(params, &center)?;
    let comm_bits = params.comm_bits(c);
    let mut out = Bits::new();
    out.push_seq(&s_a);
    let k = encode(&mut session.alice, comm_bits, &caps, &mut out)?;
    let msg = session.send(Party::Alice, out);

    let mut reader = msg.reader();
    let s_a_at_bob = reader.read_seq(x.arity(), m);
    let bob_center = estimate_from_strings(&s_a_at_bob, &s_b)?;
    let spec = TypicalSpec::new(bob_center.clone(), params.delta)?;
    let bob_comm = params.comm_bits(sw_rate(params, &bob_center)?);
    let y_own = session.bob.input.clone();
    let decoded = decode(&mut session.bob, x.arity(), bob_comm, &caps, &mut reader, |cand| {
        typical_member(&[cand, &y_own], &spec)
    })?;
    session.rounds.push(record(params, c, k, typical_member(&[x, y], &spec)?));
    Ok(outcome(session, decoded, x, Some(center)))
}

/// `t_x(a) p(b | a)` on `X x Y`.
pub(crate) fn type_times_channel(t_x: &JointType, channel: &Channel) -> Result<Dist> {
    let (ax, ay) = (channel.input_size(), channel.output_arity());
    let tx = t_x.to_dist();
    let probs = (0..ax * ay).map(|cell| tx.probs()[cell / ay] * channel.prob(cell % ay, cell / ay)).collect();
    Dist::from_weights(vec![ax, ay], probs)
}

/// One message for side information generated from `x` by a known channel: Alice sends
/// the type of `x` followed by the one-way code on `t_x * channel`.
pub fn run_sw3(x: &Seq, y: &Seq, channel: &Channel, params: &ProtocolParams, seeds: TrialSeeds, mode: &Mode) -> Result<ProtocolOutcome> {
    params.validate()?;
    if channel.input_arities() != [x.arity()] || channel.output_arity() != y.arity() {
        return Err(Error::AlphabetMismatch(vec![x.arity(), y.arity()], channel.input_arities().to_vec()));
    }
    let caps = params.caps;
    let t_x = JointType::empirical(x);
    let center = type_times_channel(&t_x, channel)?;
    let c = sw_rate(params, &center)?;
    let comm_bits = params.comm_bits(c);
    let mut session = Session::new(x.clone(), y.clone(), seeds, mode, caps)?;

    let mut out = Bits::new();
    session.announce_string(Party::Alice, &mut out);
    out.push_type(&t_x);
    let k = encode(&mut session.alice, comm_bits, &caps, &mut out)?;
    let msg = session.send(Party::Alice, out);

    let mut reader = msg.reader();
    session.learn_string(Party::Bob, &mut reader);
    let t_x_at_bob = reader.read_type(x.len(), &[x.arity()]);
    let bob_center = type_times_channel(&t_x_at_bob, channel)?;
    let spec = TypicalSpec::new(bob_center, params.delta)?;
    let y_own = session.bob.input.clone();
    let decoded = decode(&mut session.bob, x.arity(), comm_bits, &caps, &mut reader, |cand| {
        Ok(JointType::empirical(cand) == t_x_at_bob && typical_member(&[cand, &y_own], &spec)?)
    })?;
    session.rounds.push(record(params, c, k, typical_member(&[x, y], &spec)?));
    Ok(outcome(session, decoded, x, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn correlated(n: usize) -> (Seq, Seq) {
        let x = Seq::new(2, (0..n).map(|i| (i * 7 / 3) % 2).collect()).unwrap();
        let mut ys = x.symbols().to_vec();
        ys[0] ^= 1;
        (x, Seq::new(2, ys).unwrap())
    }

    #[test]
    fn sw1_with_exact_center_succeeds_often() {
        let (x, y) = correlated(10);
        let center = JointType::of(&[&x, &y]).unwrap().to_dist();
        let params = ProtocolParams::new(10);
        let ok = (0..20)
            .filter(|&t| run_sw1(&x, &y, &center, &params, TrialSeeds::new(3, t), &Mode::Unbounded).unwrap().succeeded())
            .count();
        assert!(ok >= 18, "{ok}");
    }

    #[test]
    fn sw1_single_message_no_type_bits() {
        let (x, y) = correlated(10);
        let center = JointType::of(&[&x, &y]).unwrap().to_dist();
        let params = ProtocolParams::new(10);
        let out = run_sw1(&x, &y, &center, &params, TrialSeeds::new(3, 0), &Mode::Unbounded).unwrap();
        assert_eq!(out.ledger.rounds(), 1);
        let width = 10;
        let expected = params.comm_bits(sw_rate(&params, &center).unwrap()).min(width);
        assert_eq!(out.ledger.communication_bits(), expected as u64);
        assert_eq!(out.ledger.shared_rate, 0);
    }

    #[test]
    fn sw2_first_message_has_fixed_size() {
        let (x, y) = correlated(10);
        let params = ProtocolParams { delta_s: 0.5, ..ProtocolParams::new(10) };
        let out = run_sw2(&x, &y, &params, TrialSeeds::new(5, 1), &Mode::Unbounded).unwrap();
        assert_eq!(out.ledger.round_bits()[0], (Party::Bob, sw2_round1_bits(&params, 2, None)));
        assert_eq!(out.ledger.rounds(), 2);
    }

    #[test]
    fn sw3_decodes_noiseless_side_information() {
        let x = Seq::new(2, vec![0, 1, 1, 0, 1, 0, 0, 1]).unwrap();
        let ch = Channel::identity(2).unwrap();
        let params = ProtocolParams::new(8);
        let out = run_sw3(&x, &x, &ch, &params, TrialSeeds::new(2, 2), &Mode::Unbounded).unwrap();
        assert!(out.succeeded());
        assert_eq!(out.bob[0], x);
    }
}
