//! Multi-round simulation: each message is a one-way simulation step whose sender
//! input is its own input plus the transcript so far, and whose receiver input is the
//! other side's input plus the same transcript.

use super::estimate::{estimate_from_strings, sampled_input};
use super::rst::{self, Step};
use super::wire::{BitReader, Bits};
use super::{Mode, ProtocolOutcome, ProtocolParams, Session, Status, TrialSeeds};
use crate::channel::{InteractiveSpec, Party};
use crate::error::{Error, Result};
use crate::info::{flat_index, Dist};
use crate::types::{JointType, Seq};

/// The single-letter law of `(sender side, receiver side)` before message `round`
/// (0-based), where each side is its input followed by the earlier messages.
pub fn round_center(t: &Dist, spec: &InteractiveSpec, round: usize) -> Result<Dist> {
    if t.arities() != [spec.x_arity, spec.y_arity] {
        return Err(Error::AlphabetMismatch(vec![spec.x_arity, spec.y_arity], t.arities().to_vec()));
    }
    let msg_arities = &spec.message_arities()[..round];
    let (own_arity, other_arity) = match spec.owner(round) {
        Party::Alice => (spec.x_arity, spec.y_arity),
        Party::Bob => (spec.y_arity, spec.x_arity),
    };
    let mut s_ar = vec![own_arity];
    s_ar.extend_from_slice(msg_arities);
    let mut r_ar = vec![other_arity];
    r_ar.extend_from_slice(msg_arities);
    let (s_size, r_size) = (s_ar.iter().product::<usize>(), r_ar.iter().product::<usize>());
    let mut probs = vec![0.0; s_size * r_size];
    let mut msgs = Vec::with_capacity(round);
    for x in 0..spec.x_arity {
        for y in 0..spec.y_arity {
            let w = t.prob(&[x, y]);
            if w > 0.0 {
                let (own, other) = if spec.owner(round) == Party::Alice { (x, y) } else { (y, x) };
                center_walk(spec, round, x, y, w, &mut msgs, &mut |msgs: &[usize], p: f64| {
                    let mut sd = vec![own];
                    sd.extend_from_slice(msgs);
                    let mut rd = vec![other];
                    rd.extend_from_slice(msgs);
                    probs[flat_index(&s_ar, &sd) * r_size + flat_index(&r_ar, &rd)] += p;
                });
            }
        }
    }
    Dist::from_weights(vec![s_size, r_size], probs)
}

fn center_walk(
    spec: &InteractiveSpec,
    stop: usize,
    x: usize,
    y: usize,
    prob: f64,
    msgs: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize], f64),
) {
    let k = msgs.len();
    if k == stop {
        emit(msgs, prob);
        return;
    }
    let ch = &spec.channels[k];
    let input = spec.round_input(k, x, y, msgs);
    for m in 0..ch.output_arity() {
        let q = ch.prob(m, input);
        if q > 0.0 {
            msgs.push(m);
            center_walk(spec, stop, x, y, prob * q, msgs, emit);
            msgs.pop();
        }
    }
}

fn side_seq(input: &Seq, msgs: &[Seq]) -> Result<Seq> {
    let mut parts = vec![input];
    parts.extend(msgs.iter());
    Seq::combine(&parts)
}

fn idx(p: Party) -> usize {
    match p {
        Party::Alice => 0,
        Party::Bob => 1,
    }
}

/// Radius of the typicality test for 1-based message `i`.
fn round_delta(params: &ProtocolParams, i: usize) -> f64 {
    params.delta + (i as f64 - 1.0) * params.delta_prime
}

/// What each side knows apart from its input: its center estimate and its copy of the
/// transcript.
struct Views {
    centers: [Option<Dist>; 2],
    msgs: [Vec<Seq>; 2],
}

impl Views {
    fn new() -> Self {
        Views { centers: [None, None], msgs: [Vec::new(), Vec::new()] }
    }
}

enum Flow {
    Continue,
    Stop(Status),
}

/// Message `round` (0-based) as a simulation step on the estimated center.
///
/// `header` is already written by the sender; `read_header` lets the receiver consume
/// it (and set his center) before the step.
fn standard_round(
    session: &mut Session,
    views: &mut Views,
    spec: &InteractiveSpec,
    params: &ProtocolParams,
    round: usize,
    header: Bits,
    read_header: impl FnOnce(&mut BitReader, &mut Views) -> Result<()>,
) -> Result<Flow> {
    let caps = session.caps;
    let sender = spec.owner(round);
    let receiver = sender.other();
    let delta = round_delta(params, round + 1);
    let channel = &spec.channels[round];

    let sender_center = views.centers[idx(sender)].clone().expect("sender has a center");
    let step = Step::new(params, delta, round_center(&sender_center, spec, round)?, channel, round + 1)?;
    let prior = views.msgs[idx(sender)].clone();
    let (me, other) = session.pair(sender);
    let s_seq = side_seq(&me.input, &prior)?;
    let r_true = side_seq(&other.input, &prior)?;
    let mut out = header;
    let sent = rst::send(&step, me, &s_seq, &caps, &mut out)?;
    let mut rec = rst::record(&step, round + 1, sent.as_ref().ok(), &s_seq, &r_true)?;
    let sent = match sent {
        Ok(s) => s,
        Err(event) => {
            session.rounds.push(rec);
            return Ok(Flow::Stop(Status::Abort { message: round + 1, event, detected: true }));
        }
    };
    views.msgs[idx(sender)].push(sent.message.clone());
    let msg = session.send(sender, out);

    let mut reader = msg.reader();
    read_header(&mut reader, views)?;
    let recv_center = views.centers[idx(receiver)].clone().expect("receiver has a center");
    let recv_step = Step::new(params, delta, round_center(&recv_center, spec, round)?, channel, round + 1)?;
    let me = session.party(receiver);
    let r_seq = side_seq(&me.input, &views.msgs[idx(receiver)])?;
    match rst::receive(&recv_step, me, &r_seq, &caps, &mut reader)? {
        Ok(m) => {
            rec.triple_typical = Some(step.spec.contains_triple(&sent.message, &s_seq, &r_true)?);
            session.rounds.push(rec);
            views.msgs[idx(receiver)].push(m);
            Ok(Flow::Continue)
        }
        Err(event) => {
            session.rounds.push(rec);
            Ok(Flow::Stop(Status::Abort { message: round + 1, event, detected: true }))
        }
    }
}

fn check_spec(spec: &InteractiveSpec, x: &Seq, y: &Seq) -> Result<()> {
    if x.arity() != spec.x_arity || y.arity() != spec.y_arity {
        return Err(Error::AlphabetMismatch(vec![spec.x_arity, spec.y_arity], vec![x.arity(), y.arity()]));
    }
    Ok(())
}

fn finish(session: Session, views: Views, status: Status) -> ProtocolOutcome {
    let Views { centers: [alice_center, _], msgs: [alice, bob] } = views;
    session.finish(status, alice, bob, alice_center)
}

/// `j + 1` messages: Bob's samples, then the `j` simulated messages, the first of which
/// carries Alice's samples.
pub fn run_int2(x: &Seq, y: &Seq, spec: &InteractiveSpec, params: &ProtocolParams, seeds: TrialSeeds, mode: &Mode) -> Result<ProtocolOutcome> {
    let m = params.require_m()?;
    check_spec(spec, x, y)?;
    let mut session = Session::new(x.clone(), y.clone(), seeds, mode, params.caps)?;
    let mut views = Views::new();

    let mut out = Bits::new();
    session.announce_string(Party::Bob, &mut out);
    let s_b = sampled_input(&mut session.bob, m);
    out.push_seq(&s_b);
    let msg = session.send(Party::Bob, out);

    let mut reader = msg.reader();
    session.learn_string(Party::Alice, &mut reader);
    let s_b_at_alice = reader.read_seq(y.arity(), m);
    let s_a = sampled_input(&mut session.alice, m);
    views.centers[0] = Some(estimate_from_strings(&s_a, &s_b_at_alice)?);

    for round in 0..spec.rounds() {
        let mut header = Bits::new();
        let flow = if round == 0 {
            header.push_seq(&s_a);
            let (s_b, x_arity) = (s_b.clone(), x.arity());
            standard_round(&mut session, &mut views, spec, params, round, header, |r, v| {
                let s_a_at_bob = r.read_seq(x_arity, m);
                v.centers[1] = Some(estimate_from_strings(&s_a_at_bob, &s_b)?);
                Ok(())
            })?
        } else {
            standard_round(&mut session, &mut views, spec, params, round, header, |_, _| Ok(()))?
        };
        if let Flow::Stop(status) = flow {
            return Ok(finish(session, views, status));
        }
    }
    Ok(finish(session, views, Status::Success))
}

/// `t_x` times a point mass on a one-letter alphabet.
fn first_round_center(t_x: &JointType) -> Result<Dist> {
    Dist::from_weights(vec![t_x.cells(), 1], t_x.to_dist().probs().to_vec())
}

/// `j` messages. The first is simulated against Alice's own type (Bob's input is not
/// yet involved) and carries her samples; the second carries Bob's samples.
pub fn run_int3(x: &Seq, y: &Seq, spec: &InteractiveSpec, params: &ProtocolParams, seeds: TrialSeeds, mode: &Mode) -> Result<ProtocolOutcome> {
    params.validate()?;
    check_spec(spec, x, y)?;
    let j = spec.rounds();
    let m = if j > 1 { params.require_m()? } else { 0 };
    let caps = params.caps;
    let n = x.len();
    let mut session = Session::new(x.clone(), y.clone(), seeds, mode, caps)?;
    let mut views = Views::new();
    let blank = Seq::constant(1, 0, n)?;

    // Message 1: [string index] raw-flag [t_x] m_1 [s_A].
    let mut out = Bits::new();
    session.announce_string(Party::Alice, &mut out);
    let t_x = JointType::empirical(x);
    let mut step = Step::new(params, params.delta, first_round_center(&t_x)?, &spec.channels[0], 1)?;
    let type_header = t_x.cells() as u64 * crate::types::count_width(n) as u64;
    step.raw = step.raw_is_cheaper(type_header);
    out.push_bits(&[step.raw]);
    if !step.raw {
        out.push_type(&t_x);
    }
    let sent = rst::send(&step, &mut session.alice, x, &caps, &mut out)?;
    let mut rec = rst::record(&step, 1, sent.as_ref().ok(), x, &blank)?;
    let sent = match sent {
        Ok(s) => s,
        Err(event) => {
            session.rounds.push(rec);
            return Ok(finish(session, views, Status::Abort { message: 1, event, detected: true }));
        }
    };
    views.msgs[0].push(sent.message.clone());
    let s_a = if j > 1 {
        let s = sampled_input(&mut session.alice, m);
        out.push_seq(&s);
        Some(s)
    } else {
        None
    };
    let msg = session.send(Party::Alice, out);

    let mut reader = msg.reader();
    session.learn_string(Party::Bob, &mut reader);
    let raw = reader.read_bits(1)[0];
    let received = if raw {
        Ok(reader.read_seq(spec.channels[0].output_arity(), n))
    } else {
        let t_x_at_bob = reader.read_type(n, &[x.arity()]);
        let mut bob_step = Step::new(params, params.delta, first_round_center(&t_x_at_bob)?, &spec.channels[0], 1)?;
        bob_step.raw = false;
        rst::receive(&bob_step, &mut session.bob, &blank, &caps, &mut reader)?
    };
    match received {
        Ok(m1) => {
            rec.triple_typical = Some(step.spec.contains_triple(&sent.message, x, &blank)?);
            session.rounds.push(rec);
            views.msgs[1].push(m1);
        }
        Err(event) => {
            session.rounds.push(rec);
            return Ok(finish(session, views, Status::Abort { message: 1, event, detected: true }));
        }
    }
    if j == 1 {
        return Ok(finish(session, views, Status::Success));
    }
    let s_a_at_bob = reader.read_seq(x.arity(), m);
    let s_b = sampled_input(&mut session.bob, m);
    views.centers[1] = Some(estimate_from_strings(&s_a_at_bob, &s_b)?);
    let s_a = s_a.expect("sampled when there is a second message");

    for round in 1..j {
        let mut header = Bits::new();
        let flow = if round == 1 {
            header.push_seq(&s_b);
            let (s_a, y_arity) = (s_a.clone(), y.arity());
            standard_round(&mut session, &mut views, spec, params, round, header, |r, v| {
                let s_b_at_alice = r.read_seq(y_arity, m);
                v.centers[0] = Some(estimate_from_strings(&s_a, &s_b_at_alice)?);
                Ok(())
            })?
        } else {
            standard_round(&mut session, &mut views, spec, params, round, header, |_, _| Ok(()))?
        };
        if let Flow::Stop(status) = flow {
            return Ok(finish(session, views, status));
        }
    }
    Ok(finish(session, views, Status::Success))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Channel;

    fn spec() -> InteractiveSpec {
        let first = Channel::bsc(0.1).unwrap();
        let second = Channel::on_first(&Channel::bsc(0.3).unwrap(), &[2]).unwrap();
        InteractiveSpec::new(2, 2, vec![first, second]).unwrap()
    }

    #[test]
    fn round_center_of_first_round_is_the_input_law() {
        let t = Dist::new(vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(round_center(&t, &spec(), 0).unwrap(), t);
    }

    #[test]
    fn round_center_second_round_is_consistent() {
        let t = Dist::new(vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let c = round_center(&t, &spec(), 1).unwrap();
        assert_eq!(c.arities(), &[4, 4]);
        // Bob side (y=1, m=0) against Alice side (x=0, m=0): t(0,1) * p(0|0).
        assert!((c.prob(&[2, 0]) - 0.2 * 0.9).abs() < 1e-12);
        // Inconsistent messages never co-occur.
        assert_eq!(c.prob(&[2, 1]), 0.0);
    }

    fn inputs() -> (Seq, Seq) {
        (Seq::new(2, vec![0, 1, 1, 0, 1, 0]).unwrap(), Seq::new(2, vec![0, 1, 0, 0, 1, 1]).unwrap())
    }

    fn params() -> ProtocolParams {
        ProtocolParams { delta_s: 0.5, ..ProtocolParams::new(6) }
    }

    #[test]
    fn int2_round_structure() {
        let (x, y) = inputs();
        for t in 0..10 {
            let out = run_int2(&x, &y, &spec(), &params(), TrialSeeds::new(1, t), &Mode::Unbounded).unwrap();
            if out.succeeded() {
                assert_eq!(out.ledger.rounds(), 3);
                assert_eq!(out.alice, out.bob);
                assert_eq!(out.alice.len(), 2);
            }
        }
    }

    #[test]
    fn int3_round_structure() {
        let (x, y) = inputs();
        for t in 0..10 {
            let out = run_int3(&x, &y, &spec(), &params(), TrialSeeds::new(1, t), &Mode::Unbounded).unwrap();
            if out.succeeded() {
                assert_eq!(out.ledger.rounds(), 2);
                assert_eq!(out.alice, out.bob);
            }
        }
    }
}
