//! Property tests over random inputs, seeds and parameters.

use pfcomp::channel::{Channel, InteractiveSpec};
use pfcomp::info::{
    conditional_entropy, conditional_mutual_information, gamma_bound, kl_divergence, l1_distance,
    mutual_information, shannon_entropy, Dist,
};
use pfcomp::protocols::{
    eta1, eta2, log_log_e, run_int2, run_int3, run_rst1, run_rst2, run_sw1, run_sw2, run_sw3, Mode, ProtocolOutcome,
    ProtocolParams, TrialSeeds,
};
use pfcomp::randomness::{OrderedCodebook, Tape, TapeCategory};
use pfcomp::types::{typical_member, JointType, Seq, TypicalSpec};
use proptest::prelude::*;

const SLACK: f64 = 1e-12;

fn dist(arities: Vec<usize>) -> impl Strategy<Value = Dist> {
    let len: usize = arities.iter().product();
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0..1.0f64], len)
        .prop_filter("some mass", |w| w.iter().sum::<f64>() > 1e-6)
        .prop_map(move |w| Dist::from_weights(arities.clone(), w).unwrap())
}

fn seq(arity: usize, n: usize) -> impl Strategy<Value = Seq> {
    prop::collection::vec(0..arity, n).prop_map(move |s| Seq::new(arity, s).unwrap())
}

fn pair(n: usize) -> impl Strategy<Value = (Seq, Seq)> {
    (seq(2, n), seq(2, n))
}

/// `t(x, y) p(m | x)` on `M x X x Y`.
fn with_channel(t: &Dist, ch: &Channel) -> Dist {
    let (ax, ay, am) = (t.arities()[0], t.arities()[1], ch.output_arity());
    let mut w = vec![0.0; am * ax * ay];
    for m in 0..am {
        for x in 0..ax {
            for y in 0..ay {
                w[(m * ax + x) * ay + y] = t.prob(&[x, y]) * ch.prob(m, x);
            }
        }
    }
    Dist::from_weights(vec![am, ax, ay], w).unwrap()
}

fn both_copies_agree(o: &ProtocolOutcome) -> bool {
    !o.succeeded() || o.alice == o.bob
}

fn ledger_is_exact(o: &ProtocolOutcome) -> bool {
    let l = &o.ledger;
    let merged: u64 = l.round_bits().iter().map(|(_, b)| b).sum();
    merged == l.communication_bits() && l.messages.iter().map(|m| m.bits).sum::<u64>() == l.communication_bits()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn entropy_and_information_signs(d in dist(vec![3, 2])) {
        let hx = shannon_entropy(&d, &[0]).unwrap();
        prop_assert!(hx >= -SLACK);
        prop_assert!(conditional_entropy(&d, &[0], &[1]).unwrap() <= hx + SLACK);
        let i_xy = mutual_information(&d, &[0], &[1]).unwrap();
        prop_assert!(i_xy >= -SLACK);
        prop_assert!((i_xy - mutual_information(&d, &[1], &[0]).unwrap()).abs() < SLACK);
    }

    #[test]
    fn chain_rule_on_three_coordinates(d in dist(vec![2, 3, 2])) {
        let whole = shannon_entropy(&d, &[0, 1, 2]).unwrap();
        let parts = shannon_entropy(&d, &[0]).unwrap()
            + conditional_entropy(&d, &[1], &[0]).unwrap()
            + conditional_entropy(&d, &[2], &[0, 1]).unwrap();
        prop_assert!((whole - parts).abs() < 1e-9);
        prop_assert!(conditional_mutual_information(&d, &[0], &[2], &[1]).unwrap() >= -SLACK);
    }

    #[test]
    fn pinsker(p in dist(vec![2, 3]), q in dist(vec![2, 3])) {
        let kl = kl_divergence(&p, &q).unwrap();
        let l1 = l1_distance(&p, &q).unwrap();
        prop_assert!(l1 * l1 / (2.0 * std::f64::consts::LN_2) <= kl + SLACK);
    }

    #[test]
    fn conditional_entropy_continuity(p in dist(vec![3, 2]), q in dist(vec![3, 2]), lambda in 0.0..1.0f64) {
        let mixed: Vec<f64> = p.probs().iter().zip(q.probs()).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect();
        let near = Dist::from_weights(vec![3, 2], mixed).unwrap();
        let d = l1_distance(&p, &near).unwrap();
        prop_assume!(d <= 0.5);
        let gap = (conditional_entropy(&p, &[0], &[1]).unwrap() - conditional_entropy(&near, &[0], &[1]).unwrap()).abs();
        prop_assert!(gap <= gamma_bound(3, d).unwrap() + SLACK);
    }

    #[test]
    fn marginal_of_joint_type_is_the_sequence_type(n in 1usize..12, seed in any::<u64>()) {
        let mut tape = Tape::new(TapeCategory::PrivateA, seed);
        let x = Seq::new(3, (0..n).map(|_| tape.uniform_below(3) as usize).collect()).unwrap();
        let y = Seq::new(2, (0..n).map(|_| tape.uniform_below(2) as usize).collect()).unwrap();
        let joint = JointType::of(&[&x, &y]).unwrap();
        prop_assert_eq!(joint.marginal(&[0]).unwrap(), JointType::empirical(&x));
        prop_assert_eq!(joint.marginal(&[1]).unwrap(), JointType::empirical(&y));
    }

    #[test]
    fn typicality_is_monotone_in_radius((x, y) in pair(8), center in dist(vec![2, 2]), a in 0.0..2.0f64, b in 0.0..2.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let inner = typical_member(&[&x, &y], &TypicalSpec::new(center.clone(), lo).unwrap()).unwrap();
        let outer = typical_member(&[&x, &y], &TypicalSpec::new(center, hi).unwrap()).unwrap();
        prop_assert!(!inner || outer);
    }

    #[test]
    fn prefix_filter_keeps_one_aligned_block(len in 1usize..300, k in 0u32..10, value in any::<u64>()) {
        let cb = OrderedCodebook::new((0..len).collect::<Vec<_>>());
        let w = cb.index_width();
        let k = k.min(w);
        let v = if k == 0 { 0 } else { value % (1u64 << k) };
        let bits: Vec<bool> = (0..k).map(|i| (v >> (k - 1 - i)) & 1 == 1).collect();
        let kept = cb.prefix_filter(&bits).unwrap();
        let span = 1usize << (w - k);
        let lo = (v as usize * span).min(len);
        let hi = ((v as usize + 1) * span).min(len);
        prop_assert_eq!(kept.entries(), &(lo..hi).collect::<Vec<_>>()[..]);
    }

    #[test]
    fn tapes_replay_and_count(seed in any::<u64>(), draws in prop::collection::vec(1u32..40, 1..20)) {
        let mut a = Tape::for_trial(TapeCategory::SharedRate, seed, 3);
        let mut b = Tape::for_trial(TapeCategory::SharedRate, seed, 3);
        let mut drawn = 0;
        for k in draws {
            prop_assert_eq!(a.draw_uint(k), b.draw_uint(k));
            drawn += k as u64;
            prop_assert_eq!(a.bits_drawn(), drawn);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sw1_agrees_meters_and_respects_its_rate((x, y) in pair(8), delta in 0.1..0.6f64, trial in any::<u64>()) {
        let params = ProtocolParams { delta, ..ProtocolParams::new(8) };
        let t = JointType::of(&[&x, &y]).unwrap().to_dist();
        let o = run_sw1(&x, &y, &t, &params, TrialSeeds::new(1, trial), &Mode::Unbounded).unwrap();
        prop_assert!(both_copies_agree(&o));
        prop_assert!(ledger_is_exact(&o));
        if o.succeeded() {
            prop_assert_eq!(&o.bob[0], &x);
            let cap = (8.0 * (conditional_entropy(&t, &[0], &[1]).unwrap() + eta1(&params, 2, 2).unwrap())).ceil() as u64;
            prop_assert!(o.ledger.communication_bits() <= cap, "{} > {}", o.ledger.communication_bits(), cap);
        }
    }

    #[test]
    fn sw2_and_sw3_agree_and_meter((x, y) in pair(10), trial in any::<u64>()) {
        let params = ProtocolParams { delta: 0.5, delta_s: 0.5, ..ProtocolParams::new(10) };
        let bsc = Channel::bsc(0.1).unwrap();
        for o in [
            run_sw2(&x, &y, &params, TrialSeeds::new(2, trial), &Mode::Unbounded).unwrap(),
            run_sw3(&x, &y, &bsc, &params, TrialSeeds::new(3, trial), &Mode::Unbounded).unwrap(),
        ] {
            prop_assert!(ledger_is_exact(&o));
            if o.succeeded() {
                prop_assert_eq!(&o.bob[0], &x);
            }
        }
    }

    #[test]
    fn rst1_agrees_and_respects_its_rates((x, y) in pair(8), d in 0.05..0.25f64, flip in 0.05..0.45f64, trial in any::<u64>()) {
        let params = ProtocolParams { delta: d, delta_prime: d, delta_double_prime: d, ..ProtocolParams::new(8) };
        let channel = Channel::bsc(flip).unwrap();
        let t = JointType::of(&[&x, &y]).unwrap().to_dist();
        let o = run_rst1(&x, &y, &t, &channel, &params, TrialSeeds::new(4, trial), &Mode::Unbounded).unwrap();
        prop_assert!(both_copies_agree(&o));
        prop_assert!(ledger_is_exact(&o));
        if o.succeeded() {
            let joint = with_channel(&t, &channel);
            let info = conditional_mutual_information(&joint, &[0], &[1], &[2]).unwrap();
            let cap = (8.0 * (info + eta2(&params, 2, 2, 2, d).unwrap())).ceil() as u64;
            prop_assert!(o.ledger.communication_bits() <= cap);
            let h = conditional_entropy(&joint, &[0], &[1, 2]).unwrap();
            prop_assert!(o.ledger.shared_rate <= (8.0 * h + log_log_e()).ceil() as u64);
        }
    }

    #[test]
    fn rst_with_identity_channel_returns_x((x, y) in pair(6), trial in any::<u64>()) {
        let id = Channel::identity(2).unwrap();
        let params = ProtocolParams { delta_s: 1.0, ..ProtocolParams::new(6) };
        let t = JointType::of(&[&x, &y]).unwrap().to_dist();
        for o in [
            run_rst1(&x, &y, &t, &id, &params, TrialSeeds::new(5, trial), &Mode::Unbounded).unwrap(),
            run_rst2(&x, &y, &id, &params, TrialSeeds::new(6, trial), &Mode::Unbounded).unwrap(),
        ] {
            if o.succeeded() {
                prop_assert_eq!(&o.alice[0], &x);
                prop_assert_eq!(&o.bob[0], &x);
            }
        }
    }

    #[test]
    fn interactive_runs_agree_and_keep_the_radius_chain((x, y) in pair(6), trial in any::<u64>()) {
        let spec = InteractiveSpec::new(2, 2, vec![
            Channel::bsc(0.2).unwrap(),
            Channel::on_first(&Channel::bsc(0.3).unwrap(), &[2]).unwrap(),
        ]).unwrap();
        let params = ProtocolParams { delta: 0.5, delta_prime: 0.5, delta_double_prime: 0.5, delta_s: 0.5, ..ProtocolParams::new(6) };
        for o in [
            run_int2(&x, &y, &spec, &params, TrialSeeds::new(7, trial), &Mode::Unbounded).unwrap(),
            run_int3(&x, &y, &spec, &params, TrialSeeds::new(8, trial), &Mode::Unbounded).unwrap(),
        ] {
            prop_assert!(both_copies_agree(&o));
            prop_assert!(ledger_is_exact(&o));
        }
        let o = run_int2(&x, &y, &spec, &params, TrialSeeds::new(9, trial), &Mode::Unbounded).unwrap();
        for w in o.rounds.windows(2) {
            if w[0].precondition && w[0].triple_typical == Some(true) {
                prop_assert!(w[1].precondition, "round {} lost typicality", w[1].message);
            }
        }
    }

    #[test]
    fn same_seeds_same_outcome((x, y) in pair(8), master in any::<u64>(), trial in any::<u64>()) {
        let channel = Channel::bsc(0.2).unwrap();
        let params = ProtocolParams { delta_s: 0.5, ..ProtocolParams::new(8) };
        let run = || run_rst2(&x, &y, &channel, &params, TrialSeeds::new(master, trial), &Mode::Unbounded).unwrap();
        let (a, b) = (run(), run());
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.alice, b.alice);
        prop_assert_eq!(a.ledger, b.ledger);
    }
}
