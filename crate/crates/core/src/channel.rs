//! Memoryless channels `p(m | inputs)` and multi-round interactive specifications.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{conditional_mutual_information, flat_index, Dist};
use crate::types::{enumerate_types, pow_size, Caps, JointType, Seq};

/// Which side of the conversation acts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

/// A conditional distribution over `0..output_arity` for each input tuple.
///
/// Inputs are addressed by their row-major flat index over `input_arities`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    input_arities: Vec<usize>,
    output_arity: usize,
    /// One row per flat input, `output_arity` entries each.
    table: Vec<f64>,
}

impl Channel {
    pub fn new(input_arities: Vec<usize>, output_arity: usize, table: Vec<f64>) -> Result<Self> {
        if input_arities.is_empty() || input_arities.contains(&0) || output_arity == 0 {
            return Err(Error::InvalidParam(format!(
                "channel arities must be positive: inputs {input_arities:?}, output {output_arity}"
            )));
        }
        let rows: usize = input_arities.iter().product();
        if table.len() != rows * output_arity {
            return Err(Error::TableSize { expected: rows * output_arity, got: table.len() });
        }
        for row in table.chunks(output_arity) {
            Dist::new(vec![output_arity], row.to_vec())?;
        }
        Ok(Channel { input_arities, output_arity, table })
    }

    pub fn identity(k: usize) -> Result<Self> {
        let table = (0..k * k).map(|i| if i / k == i % k { 1.0 } else { 0.0 }).collect();
        Channel::new(vec![k], k, table)
    }

    /// Binary symmetric channel with crossover `flip`.
    pub fn bsc(flip: f64) -> Result<Self> {
        Channel::new(vec![2], 2, vec![1.0 - flip, flip, flip, 1.0 - flip])
    }

    /// Ignores its inputs and always outputs `symbol`.
    pub fn constant(input_arities: Vec<usize>, output_arity: usize, symbol: usize) -> Result<Self> {
        if symbol >= output_arity {
            return Err(Error::SymbolOutOfRange { symbol, size: output_arity });
        }
        let rows: usize = input_arities.iter().product();
        let mut table = vec![0.0; rows * output_arity];
        for r in 0..rows {
            table[r * output_arity + symbol] = 1.0;
        }
        Channel::new(input_arities, output_arity, table)
    }

    /// Lifts `base` (on one input coordinate) to inputs `[base input, extra...]`,
    /// ignoring the extra coordinates.
    pub fn on_first(base: &Channel, extra: &[usize]) -> Result<Self> {
        let mut input_arities = base.input_arities.clone();
        input_arities.extend_from_slice(extra);
        let copies: usize = extra.iter().product();
        let mut table = Vec::with_capacity(base.table.len() * copies);
        for row in base.table.chunks(base.output_arity) {
            for _ in 0..copies {
                table.extend_from_slice(row);
            }
        }
        Channel::new(input_arities, base.output_arity, table)
    }

    pub fn input_arities(&self) -> &[usize] {
        &self.input_arities
    }

    pub fn input_size(&self) -> usize {
        self.input_arities.iter().product()
    }

    pub fn output_arity(&self) -> usize {
        self.output_arity
    }

    pub fn prob(&self, output: usize, input: usize) -> f64 {
        self.table[input * self.output_arity + output]
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.table[input * self.output_arity..(input + 1) * self.output_arity]
    }

    /// The same channel read as a single flattened input coordinate.
    pub fn flattened(&self) -> Channel {
        Channel { input_arities: vec![self.input_size()], output_arity: self.output_arity, table: self.table.clone() }
    }

    /// One output symbol for the flat input `input`.
    pub fn sample<R: Rng + ?Sized>(&self, input: usize, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let row = self.row(input);
        for (m, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return m;
            }
        }
        row.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    /// One output symbol for an input tuple.
    pub fn sample_tuple<R: Rng + ?Sized>(&self, inputs: &[usize], rng: &mut R) -> Result<usize> {
        if inputs.len() != self.input_arities.len() {
            return Err(Error::Arity(format!(
                "channel takes {} inputs, got {}",
                self.input_arities.len(),
                inputs.len()
            )));
        }
        for (&s, &a) in inputs.iter().zip(&self.input_arities) {
            if s >= a {
                return Err(Error::SymbolOutOfRange { symbol: s, size: a });
            }
        }
        Ok(self.sample(flat_index(&self.input_arities, inputs), rng))
    }

    /// `p^n(. | input)` applied symbol by symbol to a flattened input sequence.
    pub fn apply<R: Rng + ?Sized>(&self, input: &Seq, rng: &mut R) -> Result<Seq> {
        if input.arity() != self.input_size() {
            return Err(Error::AlphabetMismatch(vec![self.input_size()], vec![input.arity()]));
        }
        let symbols = input.symbols().iter().map(|&s| self.sample(s, rng)).collect();
        Seq::new(self.output_arity, symbols)
    }

    /// `p^n(output | input)`.
    pub fn seq_prob(&self, output: &Seq, input: &Seq) -> f64 {
        output.symbols().iter().zip(input.symbols()).map(|(&m, &s)| self.prob(m, s)).product()
    }

    /// `p(m | s) q(s, rest)` on `M x S x rest...`, for `q` whose first coordinate is the
    /// flattened channel input.
    pub fn compose(&self, q: &Dist) -> Result<Dist> {
        let ar = q.arities();
        if ar.first() != Some(&self.input_size()) {
            return Err(Error::AlphabetMismatch(vec![self.input_size()], ar.to_vec()));
        }
        let rest = q.len() / ar[0];
        let mut probs = Vec::with_capacity(self.output_arity * q.len());
        for m in 0..self.output_arity {
            for (cell, &w) in q.probs().iter().enumerate() {
                probs.push(self.prob(m, cell / rest) * w);
            }
        }
        let mut arities = vec![self.output_arity];
        arities.extend_from_slice(ar);
        Dist::from_weights(arities, probs)
    }
}

/// The exact distribution of `p^n(. | input)` over all output sequences, in lex order.
pub fn exact_output_distribution(channel: &Channel, input: &Seq, caps: &Caps) -> Result<Vec<(Seq, f64)>> {
    if input.arity() != channel.input_size() {
        return Err(Error::AlphabetMismatch(vec![channel.input_size()], vec![input.arity()]));
    }
    Ok(Seq::all(channel.output_arity(), input.len(), caps)?
        .into_iter()
        .map(|m| {
            let p = channel.seq_prob(&m, input);
            (m, p)
        })
        .collect())
}

/// A `j`-round interactive task: round `i` (0-based) is generated by Alice when `i` is
/// even and by Bob when odd, through `channels[i]` with inputs
/// `[owner's input, m_1, ..., m_i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractiveSpec {
    pub x_arity: usize,
    pub y_arity: usize,
    pub channels: Vec<Channel>,
}

impl InteractiveSpec {
    pub fn new(x_arity: usize, y_arity: usize, channels: Vec<Channel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidParam("at least one round is required".into()));
        }
        let spec = InteractiveSpec { x_arity, y_arity, channels };
        let outputs = spec.message_arities();
        for (i, ch) in spec.channels.iter().enumerate() {
            let mut expected = vec![spec.owner_arity(i)];
            expected.extend_from_slice(&outputs[..i]);
            if ch.input_arities() != expected.as_slice() {
                return Err(Error::Arity(format!(
                    "round {} channel takes {:?}, expected {expected:?}",
                    i + 1,
                    ch.input_arities()
                )));
            }
        }
        Ok(spec)
    }

    pub fn rounds(&self) -> usize {
        self.channels.len()
    }

    pub fn owner(&self, round: usize) -> Party {
        if round.is_multiple_of(2) {
            Party::Alice
        } else {
            Party::Bob
        }
    }

    fn owner_arity(&self, round: usize) -> usize {
        match self.owner(round) {
            Party::Alice => self.x_arity,
            Party::Bob => self.y_arity,
        }
    }

    pub fn message_arities(&self) -> Vec<usize> {
        self.channels.iter().map(Channel::output_arity).collect()
    }

    /// The flattened input of round `round` at one position.
    pub fn round_input(&self, round: usize, x: usize, y: usize, previous: &[usize]) -> usize {
        let own = match self.owner(round) {
            Party::Alice => x,
            Party::Bob => y,
        };
        let mut digits = vec![own];
        digits.extend_from_slice(&previous[..round]);
        flat_index(self.channels[round].input_arities(), &digits)
    }
}

/// One draw of the ideal transcript `(m_1, ..., m_j)`.
pub fn run_reference_interactive<R: Rng + ?Sized>(spec: &InteractiveSpec, x: &Seq, y: &Seq, rng: &mut R) -> Result<Vec<Seq>> {
    check_inputs(spec, x, y)?;
    let n = x.len();
    let mut symbols: Vec<Vec<usize>> = vec![Vec::with_capacity(spec.rounds()); n];
    for round in 0..spec.rounds() {
        for k in 0..n {
            let input = spec.round_input(round, x.symbols()[k], y.symbols()[k], &symbols[k]);
            let m = spec.channels[round].sample(input, rng);
            symbols[k].push(m);
        }
    }
    let arities = spec.message_arities();
    (0..spec.rounds())
        .map(|r| Seq::new(arities[r], symbols.iter().map(|s| s[r]).collect()))
        .collect()
}

fn check_inputs(spec: &InteractiveSpec, x: &Seq, y: &Seq) -> Result<()> {
    if x.arity() != spec.x_arity || y.arity() != spec.y_arity {
        return Err(Error::AlphabetMismatch(vec![spec.x_arity, spec.y_arity], vec![x.arity(), y.arity()]));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    Ok(())
}

/// Exact transcript distribution for fixed inputs.
///
/// Entry `k` is the transcript whose flat index is `k`, where a transcript is the
/// concatenation `m_1 m_2 ... m_j` read as a row-major index (round 1 most significant).
#[derive(Clone, Debug, PartialEq)]
pub struct TranscriptDist {
    pub n: usize,
    pub message_arities: Vec<usize>,
    pub probs: Vec<f64>,
}

impl TranscriptDist {
    pub fn index_of(&self, transcript: &[Seq]) -> usize {
        transcript
            .iter()
            .flat_map(|s| s.symbols().iter().map(move |&v| (v, s.arity())))
            .fold(0, |acc, (v, a)| acc * a + v)
    }

    pub fn prob_of(&self, transcript: &[Seq]) -> f64 {
        self.probs[self.index_of(transcript)]
    }
}

pub fn exact_transcript_distribution(spec: &InteractiveSpec, x: &Seq, y: &Seq, caps: &Caps) -> Result<TranscriptDist> {
    check_inputs(spec, x, y)?;
    let n = x.len();
    let arities = spec.message_arities();
    let total = arities.iter().fold(1u128, |acc, &a| acc.saturating_mul(pow_size(a, n)));
    caps.check_universe("transcripts", total)?;
    let mut probs = vec![0.0; total as usize];
    let mut symbols: Vec<Vec<usize>> = vec![Vec::with_capacity(spec.rounds()); n];
    walk_transcripts(spec, x, y, 0, 0, 0, 1.0, &mut symbols, &mut probs);
    Ok(TranscriptDist { n, message_arities: arities, probs })
}

#[allow(clippy::too_many_arguments)]
fn walk_transcripts(
    spec: &InteractiveSpec,
    x: &Seq,
    y: &Seq,
    round: usize,
    k: usize,
    index: usize,
    prob: f64,
    symbols: &mut Vec<Vec<usize>>,
    probs: &mut [f64],
) {
    let n = x.len();
    if round == spec.rounds() {
        probs[index] += prob;
        return;
    }
    if k == n {
        walk_transcripts(spec, x, y, round + 1, 0, index, prob, symbols, probs);
        return;
    }
    let ch = &spec.channels[round];
    let input = spec.round_input(round, x.symbols()[k], y.symbols()[k], &symbols[k]);
    for m in 0..ch.output_arity() {
        let q = ch.prob(m, input);
        if q == 0.0 {
            continue;
        }
        symbols[k].push(m);
        walk_transcripts(spec, x, y, round, k + 1, index * ch.output_arity() + m, prob * q, symbols, probs);
        symbols[k].pop();
    }
}

/// The single-letter joint of `(X, Y, M_1, ..., M_j)` under `t(x, y)` and the spec.
pub fn single_letter_joint(t: &Dist, spec: &InteractiveSpec) -> Result<Dist> {
    if t.arities() != [spec.x_arity, spec.y_arity] {
        return Err(Error::AlphabetMismatch(vec![spec.x_arity, spec.y_arity], t.arities().to_vec()));
    }
    let mut arities = vec![spec.x_arity, spec.y_arity];
    arities.extend(spec.message_arities());
    let mut probs = vec![0.0; arities.iter().product()];
    let mut msgs = Vec::with_capacity(spec.rounds());
    for x in 0..spec.x_arity {
        for y in 0..spec.y_arity {
            let w = t.prob(&[x, y]);
            if w > 0.0 {
                single_letter_walk(spec, x, y, 0, w, &mut msgs, &arities, &mut probs);
            }
        }
    }
    Dist::from_weights(arities, probs)
}

#[allow(clippy::too_many_arguments)]
fn single_letter_walk(
    spec: &InteractiveSpec,
    x: usize,
    y: usize,
    round: usize,
    prob: f64,
    msgs: &mut Vec<usize>,
    arities: &[usize],
    probs: &mut [f64],
) {
    if round == spec.rounds() {
        let mut digits = vec![x, y];
        digits.extend_from_slice(msgs);
        probs[flat_index(arities, &digits)] += prob;
        return;
    }
    let ch = &spec.channels[round];
    let input = spec.round_input(round, x, y, msgs);
    for m in 0..ch.output_arity() {
        let q = ch.prob(m, input);
        if q > 0.0 {
            msgs.push(m);
            single_letter_walk(spec, x, y, round + 1, prob * q, msgs, arities, probs);
            msgs.pop();
        }
    }
}

/// Internal information cost `I(M; X | Y) + I(M; Y | X)` of the transcript under `t`.
pub fn information_complexity(t: &Dist, spec: &InteractiveSpec) -> Result<f64> {
    let joint = single_letter_joint(t, spec)?;
    let msgs: Vec<usize> = (2..2 + spec.rounds()).collect();
    Ok(conditional_mutual_information(&joint, &msgs, &[0], &[1])?
        + conditional_mutual_information(&joint, &msgs, &[1], &[0])?)
}

/// The largest information cost over all joint types with denominator `n`, and a maximizer.
pub fn prior_free_ic_over_types(spec: &InteractiveSpec, n: usize, caps: &Caps) -> Result<(f64, JointType)> {
    let mut best: Option<(f64, JointType)> = None;
    for t in enumerate_types(n, &[spec.x_arity, spec.y_arity], caps)? {
        let ic = information_complexity(&t.to_dist(), spec)?;
        if best.as_ref().is_none_or(|(b, _)| ic > *b) {
            best = Some((ic, t));
        }
    }
    best.ok_or_else(|| Error::InvalidParam("no types".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bsc_probabilities() {
        let ch = Channel::bsc(0.1).unwrap();
        assert_eq!(ch.prob(1, 0), 0.1);
        assert_eq!(ch.prob(1, 1), 0.9);
        assert!(Channel::new(vec![2], 2, vec![0.5, 0.6, 0.5, 0.5]).is_err());
    }

    #[test]
    fn arity_checks() {
        let ch = Channel::bsc(0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(ch.sample_tuple(&[0, 0], &mut rng), Err(Error::Arity(_))));
        assert!(matches!(ch.sample_tuple(&[2], &mut rng), Err(Error::SymbolOutOfRange { .. })));
    }

    #[test]
    fn sampling_frequency_matches_table() {
        let ch = Channel::bsc(0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let flips = (0..20_000).filter(|_| ch.sample(0, &mut rng) == 1).count();
        let freq = flips as f64 / 20_000.0;
        assert!((freq - 0.3).abs() < 4.0 * (0.3f64 * 0.7 / 20_000.0).sqrt());
    }

    #[test]
    fn exact_output_distribution_sums_to_one() {
        let ch = Channel::bsc(0.2).unwrap();
        let x = Seq::new(2, vec![0, 1, 1]).unwrap();
        let d = exact_output_distribution(&ch, &x, &Caps::default()).unwrap();
        assert_eq!(d.len(), 8);
        let sum: f64 = d.iter().map(|(_, p)| p).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!((d[3].1 - 0.8 * 0.8 * 0.8).abs() < 1e-12);
    }

    #[test]
    fn compose_with_identity_is_diagonal() {
        let q = Dist::new(vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let joint = Channel::identity(2).unwrap().compose(&q).unwrap();
        assert_eq!(joint.arities(), &[2, 2, 2]);
        assert_eq!(joint.prob(&[0, 0, 1]), 0.2);
        assert_eq!(joint.prob(&[1, 0, 1]), 0.0);
        assert_eq!(joint.prob(&[1, 1, 0]), 0.3);
    }

    fn two_round_spec() -> InteractiveSpec {
        let first = Channel::bsc(0.1).unwrap();
        let second = Channel::on_first(&Channel::bsc(0.3).unwrap(), &[2]).unwrap();
        InteractiveSpec::new(2, 2, vec![first, second]).unwrap()
    }

    #[test]
    fn interactive_spec_validates_arities() {
        let bad = InteractiveSpec::new(2, 2, vec![Channel::bsc(0.1).unwrap(), Channel::bsc(0.1).unwrap()]);
        assert!(matches!(bad, Err(Error::Arity(_))));
        assert_eq!(two_round_spec().owner(1), Party::Bob);
    }

    #[test]
    fn transcript_distribution_sums_to_one() {
        let spec = two_round_spec();
        let x = Seq::new(2, vec![0, 1, 0]).unwrap();
        let y = Seq::new(2, vec![1, 1, 0]).unwrap();
        let d = exact_transcript_distribution(&spec, &x, &y, &Caps::default()).unwrap();
        assert_eq!(d.probs.len(), 64);
        assert!((d.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let m1 = Seq::new(2, vec![0, 1, 0]).unwrap();
        let m2 = Seq::new(2, vec![1, 1, 0]).unwrap();
        let expected = 0.9f64.powi(3) * 0.7f64.powi(3);
        assert!((d.prob_of(&[m1, m2]) - expected).abs() < 1e-12);
    }

    #[test]
    fn one_way_information_cost_is_conditional_mutual_information() {
        let spec = InteractiveSpec::new(2, 2, vec![Channel::identity(2).unwrap()]).unwrap();
        let t = Dist::new(vec![2, 2], vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let ic = information_complexity(&t, &spec).unwrap();
        // H(X | Y) for this doubly symmetric source is h2(0.2).
        assert!((ic - crate::info::h2(0.2)).abs() < 1e-12);
    }
}
