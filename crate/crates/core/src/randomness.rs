//! Metered random tapes, shared-random codebooks, prefix filtering and Newman-style
//! string sets, plus the per-run cost ledger.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::Party;
use crate::error::{Error, Result};
use crate::types::{ceil_log2, Caps};

const SLOT_SHIFT: u32 = 40;

/// What a tape's bits are accounted as.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TapeCategory {
    SharedStructural,
    SharedRate,
    PrivateA,
    PrivateB,
}

impl TapeCategory {
    fn stream_tag(self) -> u64 {
        match self {
            TapeCategory::SharedStructural => 0,
            TapeCategory::SharedRate => 1,
            TapeCategory::PrivateA => 2,
            TapeCategory::PrivateB => 3,
        }
    }
}

/// A deterministic bit source that counts every bit it hands out.
///
/// Bits come MSB-first out of 64-bit ChaCha words. Used through [`RngCore`], each
/// `next_u32` costs 32 bits and each `next_u64` 64 bits.
#[derive(Clone, Debug)]
pub struct Tape {
    category: TapeCategory,
    rng: ChaCha8Rng,
    word: u64,
    left: u32,
    bits_drawn: u64,
}

impl Tape {
    pub fn new(category: TapeCategory, seed: u64) -> Self {
        Tape { category, rng: ChaCha8Rng::seed_from_u64(seed), word: 0, left: 0, bits_drawn: 0 }
    }

    /// The tape of `category` for trial `trial` under `master`.
    pub fn for_trial(category: TapeCategory, master: u64, trial: u64) -> Self {
        Tape::for_trial_slot(category, master, trial, 0)
    }

    /// Slot `slot` of the trial tape: the same stream started far enough along that
    /// slots never overlap in practice.
    pub fn for_trial_slot(category: TapeCategory, master: u64, trial: u64, slot: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master);
        rng.set_stream((trial << 2) | category.stream_tag());
        rng.set_word_pos((slot as u128) << SLOT_SHIFT);
        Tape { category, rng, word: 0, left: 0, bits_drawn: 0 }
    }

    /// Slot `slot` of the tape seeded directly by `seed`.
    pub fn seeded_slot(category: TapeCategory, seed: u64, slot: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos((slot as u128) << SLOT_SHIFT);
        Tape { category, rng, word: 0, left: 0, bits_drawn: 0 }
    }

    pub fn category(&self) -> TapeCategory {
        self.category
    }

    pub fn bits_drawn(&self) -> u64 {
        self.bits_drawn
    }

    pub fn draw_bit(&mut self) -> bool {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        self.left -= 1;
        self.bits_drawn += 1;
        (self.word >> self.left) & 1 == 1
    }

    pub fn draw_bits(&mut self, k: usize) -> Vec<bool> {
        (0..k).map(|_| self.draw_bit()).collect()
    }

    /// `k <= 64` bits read as an unsigned integer, first bit most significant.
    pub fn draw_uint(&mut self, k: u32) -> u64 {
        assert!(k <= 64, "at most 64 bits per integer");
        (0..k).fold(0u64, |acc, _| (acc << 1) | self.draw_bit() as u64)
    }

    /// Uniform on `0..bound` by rejection on `ceil(log2 bound)` bits.
    pub fn uniform_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let width = ceil_log2(bound);
        loop {
            let v = self.draw_uint(width);
            if v < bound {
                return v;
            }
        }
    }
}

impl RngCore for Tape {
    fn next_u32(&mut self) -> u32 {
        self.draw_uint(32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.draw_uint(64)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for b in dest {
            *b = self.draw_uint(8) as u8;
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// An ordered list of candidates addressed by 0-based, MSB-first positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedCodebook<T> {
    entries: Vec<T>,
    index_width: u32,
}

impl<T> OrderedCodebook<T> {
    /// Keeps `entries` in the given order.
    pub fn new(entries: Vec<T>) -> Self {
        let index_width = ceil_log2(entries.len() as u64);
        OrderedCodebook { entries, index_width }
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_width(&self) -> u32 {
        self.index_width
    }

    /// The original positions that survive filtering by `bits`.
    pub fn prefix_range(&self, bits: &[bool]) -> Result<std::ops::Range<usize>> {
        let k = bits.len() as u32;
        if k > self.index_width {
            return Err(Error::InvalidParam(format!(
                "prefix of {k} bits exceeds index width {}",
                self.index_width
            )));
        }
        let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        let span = 1u64 << (self.index_width - k);
        let lo = (value * span).min(self.entries.len() as u64) as usize;
        let hi = ((value + 1) * span).min(self.entries.len() as u64) as usize;
        Ok(lo..hi)
    }

    /// Entries whose position starts with `bits`, re-indexed from 0.
    pub fn prefix_filter(&self, bits: &[bool]) -> Result<Self>
    where
        T: Clone,
    {
        let range = self.prefix_range(bits)?;
        Ok(OrderedCodebook::new(self.entries[range].to_vec()))
    }

    /// The first `k` bits of `position`, written in `index_width` bits.
    pub fn position_prefix(&self, position: usize, k: u32) -> Vec<bool> {
        let k = k.min(self.index_width);
        (0..k).map(|i| (position >> (self.index_width - 1 - i)) & 1 == 1).collect()
    }
}

impl<T: PartialEq> OrderedCodebook<T> {
    pub fn position_of(&self, item: &T) -> Option<usize> {
        self.entries.iter().position(|e| e == item)
    }
}

/// Fisher-Yates shuffle of `universe` driven by `tape`.
pub fn random_codebook<T>(mut universe: Vec<T>, tape: &mut Tape, caps: &Caps) -> Result<OrderedCodebook<T>> {
    caps.check_universe("codebook", universe.len() as u128)?;
    for i in (1..universe.len()).rev() {
        let j = tape.uniform_below(i as u64 + 1) as usize;
        universe.swap(i, j);
    }
    Ok(OrderedCodebook::new(universe))
}

/// Outcome of checking a string set against every input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewmanCertificate {
    pub target_fraction: f64,
    pub worst_fraction: f64,
    pub worst_input: usize,
    pub inputs: usize,
    pub attempts: usize,
}

/// `s` seeds for the structural tape; a run picks one uniformly and announces its index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewmanStrings {
    pub strings: Vec<u64>,
    pub certificate: Option<NewmanCertificate>,
}

impl NewmanStrings {
    pub fn sample(s: usize, tape: &mut Tape) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidParam("need at least one string".into()));
        }
        Ok(NewmanStrings { strings: (0..s).map(|_| tape.next_u64()).collect(), certificate: None })
    }

    pub fn s(&self) -> usize {
        self.strings.len()
    }

    /// Bits used to announce which string was picked.
    pub fn index_bits(&self) -> u32 {
        ceil_log2(self.strings.len() as u64)
    }

    /// The structural tape seeded by string `index`, at `slot`.
    pub fn tape(&self, index: usize, slot: u64) -> Tape {
        Tape::seeded_slot(TapeCategory::SharedStructural, self.strings[index], slot)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Samples string sets until one fails on at most `target_fraction` of its strings for
/// every input.
///
/// `fails(input, string)` runs the protocol on input number `input` with the given
/// structural seed and reports a failure; it is called for every pair.
pub fn newman_select<F>(
    fails: F,
    inputs: usize,
    s: usize,
    target_fraction: f64,
    tape: &mut Tape,
    max_attempts: usize,
) -> Result<NewmanStrings>
where
    F: Fn(usize, u64) -> bool + Sync,
{
    let mut worst = (0usize, f64::INFINITY);
    for attempt in 1..=max_attempts.max(1) {
        let mut set = NewmanStrings::sample(s, tape)?;
        let fractions: Vec<f64> = (0..inputs)
            .into_par_iter()
            .map(|i| set.strings.iter().filter(|&&seed| fails(i, seed)).count() as f64 / s as f64)
            .collect();
        let (worst_input, worst_fraction) = fractions
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0), |acc, (i, f)| if f > acc.1 { (i, f) } else { acc });
        if worst_fraction <= target_fraction {
            set.certificate = Some(NewmanCertificate {
                target_fraction,
                worst_fraction,
                worst_input,
                inputs,
                attempts: attempt,
            });
            return Ok(set);
        }
        if worst_fraction < worst.1 {
            worst = (worst_input, worst_fraction);
        }
    }
    Err(Error::RetryLimit {
        retries: max_attempts,
        worst_input: worst.0,
        worst_fraction: worst.1,
        target: target_fraction,
    })
}

/// One transmitted message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub sender: Party,
    pub bits: u64,
}

/// Exact bit accounting for one run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    pub messages: Vec<MessageRecord>,
    pub shared_structural: u64,
    pub shared_rate: u64,
    pub private_a: u64,
    pub private_b: u64,
    /// Structural randomness came from an announced string index.
    pub newman: bool,
}

impl CostLedger {
    pub fn communication_bits(&self) -> u64 {
        self.messages.iter().map(|m| m.bits).sum()
    }

    /// Messages merged into rounds: consecutive messages by the same sender form one round.
    pub fn round_bits(&self) -> Vec<(Party, u64)> {
        let mut out: Vec<(Party, u64)> = Vec::new();
        for m in &self.messages {
            match out.last_mut() {
                Some((p, bits)) if *p == m.sender => *bits += m.bits,
                _ => out.push((m.sender, m.bits)),
            }
        }
        out
    }

    /// Number of direction changes plus one (zero for an empty conversation).
    pub fn rounds(&self) -> usize {
        self.round_bits().len()
    }

    pub fn pre_shared_bits(&self) -> u64 {
        if self.newman {
            self.shared_rate
        } else {
            self.shared_structural + self.shared_rate
        }
    }
}

/// Builds a ledger from the messages actually sent and the tapes used.
///
/// Shared charges are the sums over the given tapes. With `newman` set, the
/// structural charge is the index width of the string set instead.
pub fn cost_report(
    messages: Vec<MessageRecord>,
    structural: &[&Tape],
    rate: &[&Tape],
    private_a: &Tape,
    private_b: &Tape,
    newman: Option<&NewmanStrings>,
) -> CostLedger {
    CostLedger {
        messages,
        shared_structural: match newman {
            Some(set) => set.index_bits() as u64,
            None => structural.iter().map(|t| t.bits_drawn()).sum(),
        },
        shared_rate: rate.iter().map(|t| t.bits_drawn()).sum(),
        private_a: private_a.bits_drawn(),
        private_b: private_b.bits_drawn(),
        newman: newman.is_some(),
    }
}
