//! The two-party protocols: joint-type estimation, side-information coding and
//! channel simulation, one-way and interactive.
//!
//! Each run is driven by a [`Session`] holding two isolated parties. A party's step
//! function sees only its own input, its own tapes and the bits it received; the
//! session moves messages between them and meters every bit.

mod estimate;
mod interactive;
mod rates;
mod rst;
mod sw;
mod wire;

pub use estimate::{estimate_from_strings, estimate_joint_type, sample_positions, EstimateOutcome};
pub use interactive::{round_center, run_int2, run_int3};
pub use rates::{
    delta_max_rounds, delta_triple_prime, estimation_failure_bound, eta1, eta2, eta3, log_log_e, rate_bounds,
    simulation_failure_bound, simulation_l1_bound, simulation_rates, sw_channel_exponent, sw_rate, RateBounds,
    SimulationRates,
};
pub(crate) use rates::simulation_rates_saturating;
pub use rst::{run_rst1, run_rst2};
pub use sw::{run_sw1, run_sw2, run_sw3, sw2_round1_bits};
pub use wire::{BitReader, Bits};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::Party;
use crate::error::{Error, Result};
use crate::info::Dist;
use crate::randomness::{cost_report, CostLedger, MessageRecord, NewmanStrings, Tape, TapeCategory};
use crate::types::{Caps, Seq};

/// Explicit values for the unspecified remainder terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OConstants {
    /// `c` in a `c/n` remainder.
    pub per_n: f64,
    /// `c` in an `O(1)` remainder.
    pub constant: f64,
    /// `c` in a `c j / n` remainder.
    pub per_n_round: f64,
}

impl Default for OConstants {
    fn default() -> Self {
        OConstants { per_n: 4.0, constant: 4.0, per_n_round: 4.0 }
    }
}

/// Block length, radii and knobs shared by every protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolParams {
    pub n: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_delta")]
    pub delta_prime: f64,
    #[serde(default = "default_delta")]
    pub delta_double_prime: f64,
    /// Sampling fraction of the estimate; `m = ceil(n * delta_s)`.
    #[serde(default = "default_delta_s")]
    pub delta_s: f64,
    #[serde(default)]
    pub o_constants: OConstants,
    #[serde(default)]
    pub caps: Caps,
    /// Replaces the computed communication rate `C` (bits per symbol).
    #[serde(default)]
    pub c_override: Option<f64>,
}

fn default_delta() -> f64 {
    0.1
}

fn default_delta_s() -> f64 {
    0.2
}

impl ProtocolParams {
    pub fn new(n: usize) -> Self {
        ProtocolParams {
            n,
            delta: default_delta(),
            delta_prime: default_delta(),
            delta_double_prime: default_delta(),
            delta_s: default_delta_s(),
            o_constants: OConstants::default(),
            caps: Caps::default(),
            c_override: None,
        }
    }

    /// Number of sampled coordinates.
    pub fn m(&self) -> usize {
        (self.n as f64 * self.delta_s - 1e-9).ceil().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParam("n must be >= 1".into()));
        }
        for (name, v) in [
            ("delta", self.delta),
            ("delta_prime", self.delta_prime),
            ("delta_double_prime", self.delta_double_prime),
            ("delta_s", self.delta_s),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.m() > self.n {
            return Err(Error::InvalidParam(format!("m = {} exceeds n = {}", self.m(), self.n)));
        }
        Ok(())
    }

    pub(crate) fn comm_bits(&self, c: f64) -> u32 {
        let c = self.c_override.unwrap_or(c);
        (self.n as f64 * c - 1e-9).ceil().max(0.0) as u32
    }

    pub(crate) fn rate_bits(&self, r: f64) -> u32 {
        (self.n as f64 * r + 1e-9).floor().max(0.0) as u32
    }

    fn require_m(&self) -> Result<usize> {
        self.validate()?;
        match self.m() {
            0 => Err(Error::InvalidParam("estimation needs m >= 1 (raise delta_s)".into())),
            m => Ok(m),
        }
    }
}

/// Where structural randomness comes from.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Mode {
    /// Fresh shared randomness per trial.
    #[default]
    Unbounded,
    /// A privately drawn index into a fixed string set, announced on the wire.
    Newman(NewmanStrings),
}

/// Seeds of one trial: every tape is derived from `(master, trial)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSeeds {
    pub master: u64,
    pub trial: u64,
}

impl TrialSeeds {
    pub fn new(master: u64, trial: u64) -> Self {
        TrialSeeds { master, trial }
    }
}

/// Error events of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AbortEvent {
    /// Sender's message failed the sender-side typicality test.
    E1,
    /// No candidate with the right joint type survived the shared-bit filter.
    E2,
    /// The receiver's decode set missed the sent message.
    E3,
    /// The receiver's decode set was ambiguous.
    E4,
}

impl AbortEvent {
    pub fn tag(self) -> &'static str {
        match self {
            AbortEvent::E1 => "E1",
            AbortEvent::E2 => "E2",
            AbortEvent::E3 => "E3",
            AbortEvent::E4 => "E4",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Success,
    /// `message` is the 1-based index of the simulated message that failed.
    /// `detected` is false when the parties finished but disagree.
    Abort { message: usize, event: AbortEvent, detected: bool },
}

/// Per simulated message bookkeeping, filled by the session (which sees both inputs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub message: usize,
    pub r: f64,
    pub c: f64,
    pub rate_bits: u32,
    pub position_bits: u32,
    pub raw: bool,
    /// The inputs of this step were within the step's typicality radius.
    pub precondition: bool,
    /// After success, the realized triple was channel-typical for this step.
    pub triple_typical: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolOutcome {
    pub status: Status,
    /// Alice's copies of the simulated messages (her input for the coding protocols).
    pub alice: Vec<Seq>,
    /// Bob's copies (his decoded sequence for the coding protocols).
    pub bob: Vec<Seq>,
    pub ledger: CostLedger,
    pub estimate: Option<Dist>,
    pub rounds: Vec<RoundRecord>,
}

impl ProtocolOutcome {
    pub fn succeeded(&self) -> bool {
        self.status == Status::Success
    }

    /// The agreed transcript, on success.
    pub fn transcript(&self) -> Option<&[Seq]> {
        self.succeeded().then_some(self.bob.as_slice())
    }

    pub fn error_tag(&self) -> &'static str {
        match self.status {
            Status::Success => "",
            Status::Abort { event, .. } => event.tag(),
        }
    }
}

/// Shared-tape slot for the estimate's sample positions.
pub(crate) const SLOT_ESTIMATE: u64 = 0;

/// Shared-tape slot for simulated message `i` (1-based) or the side-information code.
pub(crate) fn slot_round(i: usize) -> u64 {
    i as u64
}

/// One party's private view: its input, its private tape and its copies of shared tapes.
pub(crate) struct PartyState {
    pub input: Seq,
    pub private: Tape,
    seeds: TrialSeeds,
    newman_seed: Option<u64>,
    shared: BTreeMap<(u8, u64), Tape>,
}

impl PartyState {
    fn new(who: Party, input: Seq, seeds: TrialSeeds) -> Self {
        let category = match who {
            Party::Alice => TapeCategory::PrivateA,
            Party::Bob => TapeCategory::PrivateB,
        };
        PartyState {
            input,
            private: Tape::for_trial(category, seeds.master, seeds.trial),
            seeds,
            newman_seed: None,
            shared: BTreeMap::new(),
        }
    }

    pub fn structural(&mut self, slot: u64) -> &mut Tape {
        let (seeds, newman) = (self.seeds, self.newman_seed);
        self.shared.entry((0, slot)).or_insert_with(|| match newman {
            Some(seed) => Tape::seeded_slot(TapeCategory::SharedStructural, seed, slot),
            None => Tape::for_trial_slot(TapeCategory::SharedStructural, seeds.master, seeds.trial, slot),
        })
    }

    pub fn rate(&mut self, slot: u64) -> &mut Tape {
        let seeds = self.seeds;
        self.shared
            .entry((1, slot))
            .or_insert_with(|| Tape::for_trial_slot(TapeCategory::SharedRate, seeds.master, seeds.trial, slot))
    }

    fn use_string(&mut self, seed: u64) {
        self.newman_seed = Some(seed);
    }
}

/// Two isolated parties plus the wire between them.
pub(crate) struct Session<'a> {
    pub alice: PartyState,
    pub bob: PartyState,
    messages: Vec<MessageRecord>,
    newman: Option<&'a NewmanStrings>,
    pub rounds: Vec<RoundRecord>,
    pub caps: Caps,
}

impl<'a> Session<'a> {
    pub fn new(x: Seq, y: Seq, seeds: TrialSeeds, mode: &'a Mode, caps: Caps) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        let newman = match mode {
            Mode::Unbounded => None,
            Mode::Newman(set) => Some(set),
        };
        Ok(Session {
            alice: PartyState::new(Party::Alice, x, seeds),
            bob: PartyState::new(Party::Bob, y, seeds),
            messages: Vec::new(),
            newman,
            rounds: Vec::new(),
            caps,
        })
    }

    pub fn party(&mut self, who: Party) -> &mut PartyState {
        match who {
            Party::Alice => &mut self.alice,
            Party::Bob => &mut self.bob,
        }
    }

    /// Both parties, the first being `who`.
    pub fn pair(&mut self, who: Party) -> (&mut PartyState, &mut PartyState) {
        match who {
            Party::Alice => (&mut self.alice, &mut self.bob),
            Party::Bob => (&mut self.bob, &mut self.alice),
        }
    }

    /// Puts `bits` on the wire and returns them for the receiver.
    pub fn send(&mut self, sender: Party, bits: Bits) -> Bits {
        self.messages.push(MessageRecord { sender, bits: bits.len() as u64 });
        bits
    }

    /// In string-set mode, `who` draws an index privately and writes it to `out`.
    pub fn announce_string(&mut self, who: Party, out: &mut Bits) {
        if let Some(set) = self.newman {
            let me = self.party(who);
            let idx = me.private.uniform_below(set.s() as u64) as usize;
            out.push_uint(idx as u64, set.index_bits());
            me.use_string(set.strings[idx]);
        }
    }

    /// The receiving side of [`Session::announce_string`].
    pub fn learn_string(&mut self, who: Party, msg: &mut BitReader) {
        if let Some(set) = self.newman {
            let idx = msg.read_uint(set.index_bits()) as usize;
            self.party(who).use_string(set.strings[idx]);
        }
    }

    pub fn ledger(&self) -> CostLedger {
        let merged = |cat: u8| -> Vec<&Tape> {
            let mut keys: Vec<&(u8, u64)> =
                self.alice.shared.keys().chain(self.bob.shared.keys()).filter(|k| k.0 == cat).collect();
            keys.sort();
            keys.dedup();
            keys.into_iter()
                .map(|k| match (self.alice.shared.get(k), self.bob.shared.get(k)) {
                    (Some(a), Some(b)) if b.bits_drawn() > a.bits_drawn() => b,
                    (Some(a), _) => a,
                    (None, Some(b)) => b,
                    (None, None) => unreachable!("key came from one of the maps"),
                })
                .collect()
        };
        cost_report(
            self.messages.clone(),
            &merged(0),
            &merged(1),
            &self.alice.private,
            &self.bob.private,
            self.newman,
        )
    }

    pub fn finish(self, status: Status, alice: Vec<Seq>, bob: Vec<Seq>, estimate: Option<Dist>) -> ProtocolOutcome {
        let status = match status {
            Status::Success if alice != bob => {
                let message = alice.iter().zip(&bob).position(|(a, b)| a != b).map_or(alice.len(), |i| i + 1);
                Status::Abort { message, event: AbortEvent::E3, detected: false }
            }
            s => s,
        };
        let ledger = self.ledger();
        ProtocolOutcome { status, alice, bob, ledger, estimate, rounds: self.rounds }
    }
}
