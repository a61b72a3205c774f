use std::collections::BTreeSet;

use pfcomp::channel::{
    exact_transcript_distribution, run_reference_interactive, Channel, InteractiveSpec,
};
use pfcomp::info::{conditional_entropy, conditional_mutual_information, Dist};
use pfcomp::oracles::tv_from_outcomes;
use pfcomp::protocols::{
    eta2, log_log_e, run_int2, run_rst1, run_rst2, run_sw1, sw2_round1_bits, Mode, ProtocolParams, TrialSeeds,
};
use pfcomp::randomness::{random_codebook, NewmanStrings, Tape, TapeCategory};
use pfcomp::types::{
    channel_typical_prob, conditional_type_class, enumerate_type_class, enumerate_types, Caps, JointType, Seq,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bits(v: &[usize]) -> Seq {
    Seq::new(2, v.to_vec()).unwrap()
}

fn two_round_spec() -> InteractiveSpec {
    InteractiveSpec::new(
        2,
        2,
        vec![Channel::bsc(0.2).unwrap(), Channel::on_first(&Channel::bsc(0.3).unwrap(), &[2]).unwrap()],
    )
    .unwrap()
}

#[test]
fn realized_types_meet_the_next_round_radius() {
    let spec = two_round_spec();
    let params = ProtocolParams { delta: 0.5, delta_prime: 0.5, delta_double_prime: 0.5, delta_s: 0.5, ..ProtocolParams::new(6) };
    let (x, y) = (bits(&[0, 0, 1, 0, 0, 0]), bits(&[0, 0, 0, 0, 1, 0]));
    let mut eligible = 0;
    for trial in 0..2000 {
        let o = run_int2(&x, &y, &spec, &params, TrialSeeds::new(31, trial), &Mode::Unbounded).unwrap();
        for w in o.rounds.windows(2) {
            if w[0].precondition && w[0].triple_typical == Some(true) {
                eligible += 1;
                assert!(w[1].precondition, "trial {trial}");
            }
        }
    }
    assert!(eligible > 100, "only {eligible} rounds exercised the chain");
}

#[test]
fn rst1_costs_stay_under_the_rate_caps() {
    let (x, y) = (bits(&[0, 1, 0, 0, 1, 0, 1, 0]), bits(&[1, 0, 1, 1, 0, 1, 0, 1]));
    let channel = Channel::bsc(0.2).unwrap();
    let d = 0.15;
    let params = ProtocolParams { delta: d, delta_prime: d, delta_double_prime: d, ..ProtocolParams::new(8) };
    let t = JointType::of(&[&x, &y]).unwrap().to_dist();
    let mut w = vec![0.0; 8];
    for m in 0..2 {
        for xy in 0..4 {
            w[m * 4 + xy] = t.probs()[xy] * channel.prob(m, xy / 2);
        }
    }
    let joint = Dist::new(vec![2, 2, 2], w).unwrap();
    let info = conditional_mutual_information(&joint, &[0], &[1], &[2]).unwrap();
    let comm_cap = (8.0 * (info + eta2(&params, 2, 2, 2, d).unwrap())).ceil() as u64;
    let rate_cap = (8.0 * conditional_entropy(&joint, &[0], &[1, 2]).unwrap() + log_log_e()).ceil() as u64;
    let mut successes = 0;
    for trial in 0..2000 {
        let o = run_rst1(&x, &y, &t, &channel, &params, TrialSeeds::new(12, trial), &Mode::Unbounded).unwrap();
        if o.succeeded() {
            successes += 1;
            assert_eq!(o.alice, o.bob);
            assert!(o.ledger.communication_bits() <= comm_cap);
            assert!(o.ledger.shared_rate <= rate_cap);
        }
    }
    assert!(successes > 200, "{successes}");
}

#[test]
fn reference_executor_matches_the_exact_transcript_law() {
    let spec = two_round_spec();
    let (x, y) = (bits(&[0, 1, 1]), bits(&[1, 1, 0]));
    let exact = exact_transcript_distribution(&spec, &x, &y, &Caps::default()).unwrap();
    assert!((exact.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 100_000;
    let outcomes: Vec<Option<usize>> = (0..trials)
        .map(|_| Some(exact.index_of(&run_reference_interactive(&spec, &x, &y, &mut rng).unwrap())))
        .collect();
    let tv = tv_from_outcomes(&exact.probs, &outcomes).unwrap();
    let support = exact.probs.len() as f64;
    assert!(tv.l1.point / 2.0 <= 3.0 * (support / trials as f64).sqrt(), "{:?}", tv.l1);
}

#[test]
fn conditional_classes_cover_the_marginal_class() {
    let caps = Caps::default();
    for n in 1..=6 {
        let ys = Seq::all(2, n, &caps).unwrap();
        for t in enumerate_types(n, &[2, 2], &caps).unwrap() {
            let t_y = t.marginal(&[1]).unwrap();
            let mut via_y = BTreeSet::new();
            for y in ys.iter().filter(|y| JointType::empirical(y) == t_y) {
                via_y.extend(conditional_type_class(&t, y, &caps).unwrap());
            }
            let direct: BTreeSet<Seq> = enumerate_type_class(&t.marginal(&[0]).unwrap(), &caps)
                .unwrap()
                .into_iter()
                .map(|mut v| v.remove(0))
                .collect();
            assert_eq!(via_y, direct, "n = {n}, counts {:?}", t.counts());
        }
    }
}

#[test]
fn channel_typical_probability_against_its_lower_bound() {
    let caps = Caps::default();
    let channel = Channel::bsc(0.2).unwrap();
    let mut informative = 0;
    for n in [4, 6, 8] {
        for dp in [0.1, 0.3, 0.6, 1.0] {
            let x = Seq::from_index(2, n, 0b1011 % (1 << n));
            let y = Seq::from_index(2, n, 0b0110 % (1 << n));
            let p = channel_typical_prob(&channel, &x, &y, dp, &caps).unwrap();
            assert!((0.0..=1.0 + 1e-12).contains(&p));
            let nf = n as f64;
            let lower = 1.0 - (-nf * dp * dp / (2.0 * std::f64::consts::LN_2) + 2.0 * 8.0 * (nf + 1.0).log2()).exp2();
            if lower > 0.0 {
                informative += 1;
                assert!(p >= lower - 1e-12);
            }
        }
    }
    // At these block lengths the bound never says anything.
    assert_eq!(informative, 0);
}

#[test]
fn codebook_shuffle_cost_is_within_twice_the_width() {
    let caps = Caps::default();
    for size in [2usize, 3, 5, 17, 100, 1000] {
        let width = (size as f64).log2().ceil() as u64;
        let runs = 200;
        let mut total = 0;
        for seed in 0..runs {
            let mut tape = Tape::new(TapeCategory::SharedStructural, seed);
            let cb = random_codebook((0..size).collect(), &mut tape, &caps).unwrap();
            let mut sorted = cb.into_entries();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..size).collect::<Vec<_>>());
            total += tape.bits_drawn();
        }
        assert!(total as f64 / runs as f64 <= 2.0 * (size as u64 * width) as f64, "size {size}");
    }
}

#[test]
fn single_round_int2_has_the_rst2_message_layout() {
    let spec = InteractiveSpec::new(2, 2, vec![Channel::bsc(0.2).unwrap()]).unwrap();
    let params = ProtocolParams { delta: 0.5, delta_prime: 0.5, delta_double_prime: 0.5, delta_s: 0.5, ..ProtocolParams::new(8) };
    let (x, y) = (bits(&[0, 1, 0, 0, 1, 0, 1, 0]), bits(&[1, 0, 1, 1, 0, 1, 0, 1]));
    let channel = Channel::bsc(0.2).unwrap();
    for trial in 0..50 {
        let a = run_int2(&x, &y, &spec, &params, TrialSeeds::new(3, trial), &Mode::Unbounded).unwrap();
        let b = run_rst2(&x, &y, &channel, &params, TrialSeeds::new(3, trial), &Mode::Unbounded).unwrap();
        let first = |o: &pfcomp::protocols::ProtocolOutcome| o.ledger.messages.first().map(|m| (m.sender, m.bits));
        assert_eq!(first(&a), first(&b));
        assert_eq!(a.ledger.messages[0].bits, sw2_round1_bits(&params, 2, None));
        assert!(a.ledger.rounds() <= 2 && b.ledger.rounds() <= 2);
    }
}

#[test]
fn newman_mode_charges_only_the_index() {
    let n = 5;
    let params = ProtocolParams { delta: 0.2, ..ProtocolParams::new(n) };
    let mut tape = Tape::new(TapeCategory::SharedStructural, 8);
    let strings = NewmanStrings::sample(640, &mut tape).unwrap();
    let width = strings.index_bits() as u64;
    let mode = Mode::Newman(strings);
    for trial in 0..100 {
        let x = Seq::from_index(2, n, trial % 32);
        let y = Seq::from_index(2, n, (trial * 7) % 32);
        let t = JointType::of(&[&x, &y]).unwrap().to_dist();
        let o = run_sw1(&x, &y, &t, &params, TrialSeeds::new(1, trial), &mode).unwrap();
        assert!(o.ledger.newman);
        assert_eq!(o.ledger.shared_structural, width);
        assert_eq!(o.ledger.pre_shared_bits(), o.ledger.shared_rate);
        assert!(o.ledger.communication_bits() >= width);
    }
}
