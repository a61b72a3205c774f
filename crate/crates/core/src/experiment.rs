//! Batch runs described by a JSON config: one CSV row per trial, in trial order, and a
//! JSON summary with failure rates, mean costs and bound checks.
//!
//! CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `trial` | trial index, `0..trials` |
//! | `protocol` | protocol name as in the config |
//! | `seed` | master seed |
//! | `status` | `success` or `abort` |
//! | `error_tag` | `E1`..`E4` on abort, empty on success |
//! | `abort_message` | 1-based simulated message that failed, empty on success |
//! | `detected` | `false` when both sides finished but disagree |
//! | `rounds` | rounds on the wire; consecutive messages from one side count once |
//! | `round_bits` | per round `A<bits>` or `B<bits>`, space separated |
//! | `communication_bits` | total bits on the wire |
//! | `shared_structural`, `shared_rate` | shared bits drawn, per category |
//! | `private_a`, `private_b` | private bits drawn |
//! | `decoded_correct` | on success: decoded sequence equals `x` (coding protocols) or both copies agree |
//! | `estimation_error` | largest cell deviation of the estimate from the true joint type |
//! | `transcript` | Bob's copies of the messages (or decoded sequence), `|` separated |

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{Channel, InteractiveSpec, Party};
use crate::error::{Error, Result};
use crate::info::Dist;
use crate::oracles::{BoundReport, MCEstimate};
use crate::protocols::{
    delta_triple_prime, estimate_joint_type, estimation_failure_bound, run_int2, run_int3, run_rst1, run_rst2,
    run_sw1, run_sw2, run_sw3, simulation_failure_bound, sw_channel_exponent, Mode, ProtocolOutcome,
    ProtocolParams, Status, TrialSeeds,
};
use crate::randomness::{NewmanStrings, Tape, TapeCategory};
use crate::types::{JointType, Seq, TypicalSpec};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// String-set size in Newman mode when the config does not give one.
pub const DEFAULT_NEWMAN_STRINGS: usize = 1024;

/// Multiples of the 95% half-width granted to a measured rate.
const SLACK_CI: f64 = 3.0 / 1.96;

const INPUT_STREAM_SALT: u64 = 0x6a09_e667_f3bc_c908;
const NEWMAN_STREAM_SALT: u64 = 0xbb67_ae85_84ca_a73b;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolName {
    Estimate,
    Sw1,
    Sw2,
    Sw3,
    Rst1,
    Rst2,
    Int2,
    Int3,
}

/// Protocol groups, one per CLI subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Estimate,
    SlepianWolf,
    ReverseShannon,
    Interactive,
}

impl ProtocolName {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolName::Estimate => "estimate",
            ProtocolName::Sw1 => "sw1",
            ProtocolName::Sw2 => "sw2",
            ProtocolName::Sw3 => "sw3",
            ProtocolName::Rst1 => "rst1",
            ProtocolName::Rst2 => "rst2",
            ProtocolName::Int2 => "int2",
            ProtocolName::Int3 => "int3",
        }
    }

    pub fn family(self) -> Family {
        match self {
            ProtocolName::Estimate => Family::Estimate,
            ProtocolName::Sw1 | ProtocolName::Sw2 | ProtocolName::Sw3 => Family::SlepianWolf,
            ProtocolName::Rst1 | ProtocolName::Rst2 => Family::ReverseShannon,
            ProtocolName::Int2 | ProtocolName::Int3 => Family::Interactive,
        }
    }

    fn channels_expected(self) -> std::ops::RangeInclusive<usize> {
        match self {
            ProtocolName::Estimate | ProtocolName::Sw1 | ProtocolName::Sw2 => 0..=0,
            ProtocolName::Sw3 | ProtocolName::Rst1 | ProtocolName::Rst2 => 1..=1,
            ProtocolName::Int2 | ProtocolName::Int3 => 1..=usize::MAX,
        }
    }
}

/// A channel given by a named preset or an explicit table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelConfig {
    Identity { arity: usize },
    Bsc { flip: f64 },
    Constant { inputs: Vec<usize>, output_arity: usize, symbol: usize },
    /// Row-major `p(output | input)`, one row per flattened input.
    Table { inputs: Vec<usize>, output_arity: usize, table: Vec<f64> },
    /// `base` applied to the first input coordinate, ignoring inputs of sizes `extra`.
    OnFirst { base: Box<ChannelConfig>, extra: Vec<usize> },
}

impl ChannelConfig {
    pub fn build(&self) -> Result<Channel> {
        match self {
            ChannelConfig::Identity { arity } => Channel::identity(*arity),
            ChannelConfig::Bsc { flip } => Channel::bsc(*flip),
            ChannelConfig::Constant { inputs, output_arity, symbol } => {
                Channel::constant(inputs.clone(), *output_arity, *symbol)
            }
            ChannelConfig::Table { inputs, output_arity, table } => {
                Channel::new(inputs.clone(), *output_arity, table.clone())
            }
            ChannelConfig::OnFirst { base, extra } => Channel::on_first(&base.build()?, extra),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPair {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

/// How each trial's `(x, y)` is produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputLaw {
    /// The same pair every trial.
    Fixed { x: Vec<usize>, y: Vec<usize> },
    /// `n` i.i.d. pairs from a row-major joint law on `X x Y`. With `within`, draws are
    /// repeated until the pair is in the typical set of radius `within` around `joint`.
    Iid {
        joint: Vec<f64>,
        #[serde(default)]
        within: Option<f64>,
    },
    /// Trial `i` uses pair `i mod len`.
    List { pairs: Vec<InputPair> },
}

/// The center handed to the protocols that take one (`sw1`, `rst1`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum CenterConfig {
    /// The joint type of the trial's own inputs.
    #[default]
    ExactType,
    /// The `joint` of an `iid` input law.
    Law,
    /// An explicit row-major law on `X x Y`.
    Table(Vec<f64>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    #[default]
    Unbounded,
    Newman,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: ProtocolName,
    pub x_arity: usize,
    pub y_arity: usize,
    #[serde(default)]
    pub channels: Vec<ChannelConfig>,
    pub inputs: InputLaw,
    #[serde(default)]
    pub center: CenterConfig,
    pub params: ProtocolParams,
    #[serde(default)]
    pub mode: ModeName,
    /// String-set size in Newman mode.
    #[serde(default)]
    pub newman_strings: Option<usize>,
    pub trials: u64,
    pub seed: u64,
    /// Output directory; `run_experiment` writes nothing when absent.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Everything a trial needs, built once from the config.
struct Prepared {
    channels: Vec<Channel>,
    spec: Option<InteractiveSpec>,
    joint: Option<Dist>,
    center: Option<Dist>,
    mode: Mode,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        ExperimentConfig::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: String| Err(Error::Config(format!("{name}: {msg}")));
        if self.x_arity == 0 || self.y_arity == 0 {
            return field("x_arity/y_arity", "alphabets must be non-empty".into());
        }
        self.params.validate().map_err(|e| Error::Config(format!("params: {e}")))?;
        let n = self.params.n;
        if !self.protocol.channels_expected().contains(&self.channels.len()) {
            return field("channels", format!("{} takes {:?} channels, got {}", self.protocol.as_str(), self.protocol.channels_expected(), self.channels.len()));
        }
        let check_seq = |name: &str, s: &[usize], arity: usize| -> Result<()> {
            if s.len() != n {
                return Err(Error::Config(format!("{name}: length {} differs from params.n = {n}", s.len())));
            }
            if let Some(&bad) = s.iter().find(|&&v| v >= arity) {
                return Err(Error::Config(format!("{name}: symbol {bad} outside alphabet of size {arity}")));
            }
            Ok(())
        };
        match &self.inputs {
            InputLaw::Fixed { x, y } => {
                check_seq("inputs.x", x, self.x_arity)?;
                check_seq("inputs.y", y, self.y_arity)?;
            }
            InputLaw::Iid { joint, within } => {
                Dist::new(vec![self.x_arity, self.y_arity], joint.clone())
                    .map_err(|e| Error::Config(format!("inputs.joint: {e}")))?;
                if let Some(w) = within {
                    if !(0.0..=2.0).contains(w) {
                        return field("inputs.within", format!("{w} outside [0, 2]"));
                    }
                }
            }
            InputLaw::List { pairs } => {
                if pairs.is_empty() {
                    return field("inputs.pairs", "list is empty".into());
                }
                for (i, p) in pairs.iter().enumerate() {
                    check_seq(&format!("inputs.pairs[{i}].x"), &p.x, self.x_arity)?;
                    check_seq(&format!("inputs.pairs[{i}].y"), &p.y, self.y_arity)?;
                }
            }
        }
        match (&self.center, &self.inputs) {
            (CenterConfig::Law, InputLaw::Iid { .. }) | (CenterConfig::ExactType, _) => {}
            (CenterConfig::Law, _) => return field("center", "\"law\" needs an iid input law".into()),
            (CenterConfig::Table(t), _) => {
                Dist::new(vec![self.x_arity, self.y_arity], t.clone())
                    .map_err(|e| Error::Config(format!("center: {e}")))?;
            }
        }
        if self.mode == ModeName::Unbounded && self.newman_strings.is_some() {
            return field("newman_strings", "only meaningful with mode = newman".into());
        }
        if self.newman_strings == Some(0) {
            return field("newman_strings", "must be at least 1".into());
        }
        self.prepare().map(|_| ())
    }

    fn prepare(&self) -> Result<Prepared> {
        let channels = self
            .channels
            .iter()
            .enumerate()
            .map(|(i, c)| c.build().map_err(|e| Error::Config(format!("channels[{i}]: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let spec = match self.protocol.family() {
            Family::Interactive => Some(
                InteractiveSpec::new(self.x_arity, self.y_arity, channels.clone())
                    .map_err(|e| Error::Config(format!("channels: {e}")))?,
            ),
            _ => None,
        };
        if let Some(ch) = channels.first().filter(|_| spec.is_none()) {
            if ch.input_arities() != [self.x_arity] {
                return Err(Error::Config(format!("channels[0]: inputs {:?} must be [x_arity]", ch.input_arities())));
            }
            if self.protocol == ProtocolName::Sw3 && ch.output_arity() != self.y_arity {
                return Err(Error::Config("channels[0]: sw3 needs output_arity = y_arity".into()));
            }
        }
        let joint = match &self.inputs {
            InputLaw::Iid { joint, .. } => Some(Dist::new(vec![self.x_arity, self.y_arity], joint.clone())?),
            _ => None,
        };
        let center = match &self.center {
            CenterConfig::ExactType => None,
            CenterConfig::Law => joint.clone(),
            CenterConfig::Table(t) => Some(Dist::new(vec![self.x_arity, self.y_arity], t.clone())?),
        };
        let mode = match self.mode {
            ModeName::Unbounded => Mode::Unbounded,
            ModeName::Newman => {
                let s = self.newman_strings.unwrap_or(DEFAULT_NEWMAN_STRINGS);
                let mut tape = Tape::new(TapeCategory::SharedStructural, self.seed ^ NEWMAN_STREAM_SALT);
                Mode::Newman(NewmanStrings::sample(s, &mut tape)?)
            }
        };
        Ok(Prepared { channels, spec, joint, center, mode })
    }
}

fn input_rng(master: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master ^ INPUT_STREAM_SALT);
    rng.set_stream(trial);
    rng
}

fn iid_pair(joint: &Dist, n: usize, rng: &mut ChaCha8Rng) -> (Seq, Seq) {
    let ay = joint.arities()[1];
    let (mut xs, mut ys) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut cell = joint.len() - 1;
        for (i, &p) in joint.probs().iter().enumerate() {
            acc += p;
            if u < acc {
                cell = i;
                break;
            }
        }
        xs.push(cell / ay);
        ys.push(cell % ay);
    }
    let x = Seq::new(joint.arities()[0], xs).expect("cells lie in the alphabet");
    let y = Seq::new(ay, ys).expect("cells lie in the alphabet");
    (x, y)
}

/// Draws before giving up on the `within` condition.
const MAX_TYPICAL_DRAWS: usize = 100_000;

fn draw_inputs(config: &ExperimentConfig, prep: &Prepared, trial: u64) -> Result<(Seq, Seq)> {
    let n = config.params.n;
    let mut rng = input_rng(config.seed, trial);
    let (x, y) = match &config.inputs {
        InputLaw::Fixed { x, y } => (Seq::new(config.x_arity, x.clone())?, Seq::new(config.y_arity, y.clone())?),
        InputLaw::List { pairs } => {
            let p = &pairs[(trial % pairs.len() as u64) as usize];
            (Seq::new(config.x_arity, p.x.clone())?, Seq::new(config.y_arity, p.y.clone())?)
        }
        InputLaw::Iid { within, .. } => {
            let joint = prep.joint.as_ref().expect("iid law has a joint");
            match within {
                None => iid_pair(joint, n, &mut rng),
                Some(radius) => {
                    let spec = TypicalSpec::new(joint.clone(), *radius)?;
                    let mut draws = 0;
                    loop {
                        let (x, y) = iid_pair(joint, n, &mut rng);
                        if crate::types::typical_member(&[&x, &y], &spec)? {
                            break (x, y);
                        }
                        draws += 1;
                        if draws == MAX_TYPICAL_DRAWS {
                            return Err(Error::Config(format!(
                                "inputs.within: no typical draw in {MAX_TYPICAL_DRAWS} attempts"
                            )));
                        }
                    }
                }
            }
        }
    };
    if config.protocol == ProtocolName::Sw3 {
        // Side information is the channel's output on x.
        let y = prep.channels[0].apply(&x, &mut rng)?;
        return Ok((x, y));
    }
    Ok((x, y))
}

/// One trial, with the harness-side checks that need both inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub x: Seq,
    pub y: Seq,
    pub outcome: ProtocolOutcome,
    /// On success: Bob decoded `x` (coding protocols) or both copies agree.
    pub decoded_correct: Option<bool>,
    /// Largest cell deviation of the estimate from the true joint type.
    pub estimation_error: Option<f64>,
}

fn max_cell_deviation(estimate: &Dist, truth: &Dist) -> f64 {
    estimate.probs().iter().zip(truth.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn run_trial(config: &ExperimentConfig, prep: &Prepared, trial: u64) -> Result<TrialRecord> {
    let (x, y) = draw_inputs(config, prep, trial)?;
    let seeds = TrialSeeds::new(config.seed, trial);
    let params = &config.params;
    let truth = JointType::of(&[&x, &y])?.to_dist();
    let center = || prep.center.clone().unwrap_or_else(|| truth.clone());
    let outcome = match config.protocol {
        ProtocolName::Estimate => {
            let est = estimate_joint_type(&x, &y, params, seeds, &prep.mode)?;
            let status = if est.alice == est.bob {
                Status::Success
            } else {
                Status::Abort { message: 2, event: crate::protocols::AbortEvent::E3, detected: false }
            };
            ProtocolOutcome { status, alice: vec![], bob: vec![], ledger: est.ledger, estimate: Some(est.alice), rounds: vec![] }
        }
        ProtocolName::Sw1 => run_sw1(&x, &y, &center(), params, seeds, &prep.mode)?,
        ProtocolName::Sw2 => run_sw2(&x, &y, params, seeds, &prep.mode)?,
        ProtocolName::Sw3 => run_sw3(&x, &y, &prep.channels[0], params, seeds, &prep.mode)?,
        ProtocolName::Rst1 => run_rst1(&x, &y, &center(), &prep.channels[0], params, seeds, &prep.mode)?,
        ProtocolName::Rst2 => run_rst2(&x, &y, &prep.channels[0], params, seeds, &prep.mode)?,
        ProtocolName::Int2 => run_int2(&x, &y, prep.spec.as_ref().expect("interactive"), params, seeds, &prep.mode)?,
        ProtocolName::Int3 => run_int3(&x, &y, prep.spec.as_ref().expect("interactive"), params, seeds, &prep.mode)?,
    };
    let decoded_correct = outcome.succeeded().then(|| match config.protocol.family() {
        Family::SlepianWolf => outcome.bob.first() == Some(&x),
        _ => outcome.alice == outcome.bob,
    });
    let estimation_error = outcome.estimate.as_ref().map(|e| max_cell_deviation(e, &truth));
    Ok(TrialRecord { trial, x, y, outcome, decoded_correct, estimation_error })
}

/// Runs every trial (in parallel) and returns the records in trial order.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let prep = config.prepare()?;
    (0..config.trials).into_par_iter().map(|t| run_trial(config, &prep, t)).collect()
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    trial: u64,
    protocol: &'a str,
    seed: u64,
    status: &'a str,
    error_tag: &'a str,
    abort_message: Option<usize>,
    detected: Option<bool>,
    rounds: usize,
    round_bits: String,
    communication_bits: u64,
    shared_structural: u64,
    shared_rate: u64,
    private_a: u64,
    private_b: u64,
    decoded_correct: Option<bool>,
    estimation_error: Option<f64>,
    transcript: String,
}

fn seq_text(s: &Seq) -> String {
    if s.arity() <= 10 {
        s.symbols().iter().map(|d| char::from(b'0' + *d as u8)).collect()
    } else {
        s.symbols().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// Writes the records as CSV (header always present).
pub fn write_csv<W: std::io::Write>(config: &ExperimentConfig, records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record([
            "trial", "protocol", "seed", "status", "error_tag", "abort_message", "detected", "rounds", "round_bits",
            "communication_bits", "shared_structural", "shared_rate", "private_a", "private_b", "decoded_correct",
            "estimation_error", "transcript",
        ])?;
    }
    for r in records {
        let o = &r.outcome;
        let (status, abort_message, detected) = match o.status {
            Status::Success => ("success", None, None),
            Status::Abort { message, detected, .. } => ("abort", Some(message), Some(detected)),
        };
        let round_bits = o
            .ledger
            .round_bits()
            .iter()
            .map(|(p, b)| format!("{}{b}", if *p == Party::Alice { 'A' } else { 'B' }))
            .collect::<Vec<_>>()
            .join(" ");
        let transcript = if o.succeeded() { o.bob.iter().map(seq_text).collect::<Vec<_>>().join("|") } else { String::new() };
        w.serialize(CsvRow {
            trial: r.trial,
            protocol: config.protocol.as_str(),
            seed: config.seed,
            status,
            error_tag: o.error_tag(),
            abort_message,
            detected,
            rounds: o.ledger.rounds(),
            round_bits,
            communication_bits: o.ledger.communication_bits(),
            shared_structural: o.ledger.shared_structural,
            shared_rate: o.ledger.shared_rate,
            private_a: o.ledger.private_a,
            private_b: o.ledger.private_b,
            decoded_correct: r.decoded_correct,
            estimation_error: r.estimation_error,
            transcript,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryResults {
    pub protocol: ProtocolName,
    pub trials: u64,
    pub successes: u64,
    pub failure_rate: Option<MCEstimate>,
    /// Over successful trials.
    pub mean_cc_per_n: Option<f64>,
    pub mean_sr_per_n: Option<f64>,
    pub abort_counts: BTreeMap<String, u64>,
    /// Infinite bounds are written as `null`.
    #[serde(with = "crate::oracles::unbounded::values")]
    pub bounds: BTreeMap<String, f64>,
    pub reports: Vec<BoundReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryMetadata {
    pub generated_unix_secs: u64,
    pub crate_version: String,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub metadata: SummaryMetadata,
    pub results: SummaryResults,
}

/// Failure-probability bound of the protocol for this config, when one is defined.
/// `None` inside means the bound's exponent is non-positive (vacuous).
fn failure_bound(config: &ExperimentConfig, prep: &Prepared) -> Result<Option<(String, Option<f64>)>> {
    let p = &config.params;
    let n = p.n;
    let (ax, ay) = (config.x_arity, config.y_arity);
    let est = || estimation_failure_bound(p.m(), p.delta, ax, ay);
    let rst_one = |am: usize, ax: usize, ay: usize| {
        let dmin = p.delta.min(delta_triple_prime(p, am, ax, ay)).min(p.delta_double_prime);
        simulation_failure_bound(n, dmin)
    };
    let sw = (-(n as f64) * p.delta).exp2();
    Ok(Some(match config.protocol {
        ProtocolName::Estimate => ("estimation_failure".into(), Some(est())),
        ProtocolName::Sw1 => ("sw1_failure".into(), Some(sw)),
        ProtocolName::Sw2 => ("sw2_failure_union".into(), Some(est() + sw)),
        ProtocolName::Sw3 => ("sw3_failure".into(), Some(0.75 * (-(n as f64) * sw_channel_exponent(p, ax, ay)).exp2())),
        ProtocolName::Rst1 => ("rst1_not_good".into(), rst_one(prep.channels[0].output_arity(), ax, ay)),
        ProtocolName::Rst2 => {
            ("rst2_failure_union".into(), rst_one(prep.channels[0].output_arity(), ax, ay).map(|b| b + est()))
        }
        ProtocolName::Int2 | ProtocolName::Int3 => {
            let spec = prep.spec.as_ref().expect("interactive");
            let mut worst: Option<f64> = Some(0.0);
            let msg_ar = spec.message_arities();
            for round in 0..spec.rounds() {
                let prior: usize = msg_ar[..round].iter().product();
                let (own, other) = match spec.owner(round) {
                    Party::Alice => (ax, ay),
                    Party::Bob => (ay, ax),
                };
                let b = rst_one(msg_ar[round], own * prior, other * prior);
                worst = match (worst, b) {
                    (Some(w), Some(b)) => Some(w.max(b)),
                    _ => None,
                };
            }
            let name = format!("{}_not_good", config.protocol.as_str());
            (name, worst.map(|w| w * spec.rounds() as f64))
        }
    }))
}

pub fn summarize(config: &ExperimentConfig, records: &[TrialRecord]) -> Result<SummaryResults> {
    let prep = config.prepare()?;
    let trials = records.len() as u64;
    let successes = records.iter().filter(|r| r.outcome.succeeded()).count() as u64;
    let mut abort_counts = BTreeMap::new();
    for r in records.iter().filter(|r| !r.outcome.succeeded()) {
        *abort_counts.entry(r.outcome.error_tag().to_string()).or_insert(0) += 1;
    }
    let n = config.params.n as f64;
    let ok: Vec<&TrialRecord> = records.iter().filter(|r| r.outcome.succeeded()).collect();
    let mean = |f: &dyn Fn(&TrialRecord) -> f64| {
        (!ok.is_empty()).then(|| ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64 / n)
    };
    let mean_cc_per_n = mean(&|r| r.outcome.ledger.communication_bits() as f64);
    let mean_sr_per_n = mean(&|r| r.outcome.ledger.pre_shared_bits() as f64);
    let failure_rate = (trials > 0).then(|| MCEstimate::proportion(trials - successes, trials)).transpose()?;

    let mut bounds = BTreeMap::new();
    let mut reports = Vec::new();
    if let Some((name, value)) = failure_bound(config, &prep)? {
        let value = value.unwrap_or(f64::INFINITY);
        bounds.insert(name.clone(), value);
        let measured = if config.protocol == ProtocolName::Estimate {
            let misses = records.iter().filter(|r| r.estimation_error.is_some_and(|e| e > config.params.delta)).count();
            (trials > 0).then(|| MCEstimate::proportion(misses as u64, trials)).transpose()?
        } else {
            failure_rate
        };
        if let Some(m) = measured {
            reports.push(BoundReport::probability(name, value, m, SLACK_CI));
        }
    }
    Ok(SummaryResults {
        protocol: config.protocol,
        trials,
        successes,
        failure_rate,
        mean_cc_per_n,
        mean_sr_per_n,
        abort_counts,
        bounds,
        reports,
    })
}

/// Where an experiment's files went and what it found.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub csv: Option<PathBuf>,
    pub summary_path: Option<PathBuf>,
    pub summary: Summary,
    pub records: Vec<TrialRecord>,
}

impl ExperimentOutput {
    /// A bound that says something was violated.
    pub fn failed(&self) -> bool {
        self.summary.results.reports.iter().any(BoundReport::failed)
    }
}

/// Runs the config; with `out` set, writes `<protocol>.csv` and `<protocol>.summary.json`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let records = run_trials(config)?;
    let results = summarize(config, &records)?;
    let generated_unix_secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let summary = Summary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        metadata: SummaryMetadata {
            generated_unix_secs,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
        },
        results,
    };
    let (mut csv_path, mut summary_path) = (None, None);
    if let Some(dir) = &config.out {
        fs::create_dir_all(dir)?;
        let stem = config.protocol.as_str();
        let path = dir.join(format!("{stem}.csv"));
        write_csv(config, &records, fs::File::create(&path)?)?;
        csv_path = Some(path);
        let path = dir.join(format!("{stem}.summary.json"));
        fs::write(&path, serde_json::to_string_pretty(&summary)?)?;
        summary_path = Some(path);
    }
    Ok(ExperimentOutput { csv: csv_path, summary_path, summary, records })
}

/// A small runnable config for each protocol.
pub fn preset(protocol: ProtocolName) -> ExperimentConfig {
    let bsc = |flip| ChannelConfig::Bsc { flip };
    let coupled = vec![0.45, 0.05, 0.05, 0.45];
    let (n, channels, inputs, delta_s) = match protocol {
        ProtocolName::Estimate => (1000, vec![], InputLaw::Iid { joint: vec![0.25; 4], within: None }, 0.2),
        ProtocolName::Sw1 => (8, vec![], InputLaw::Iid { joint: coupled, within: Some(0.2) }, 0.2),
        ProtocolName::Sw2 => (12, vec![], InputLaw::Iid { joint: coupled, within: None }, 0.5),
        ProtocolName::Sw3 => (8, vec![bsc(0.1)], InputLaw::Iid { joint: vec![0.25; 4], within: None }, 0.2),
        ProtocolName::Rst1 => (8, vec![bsc(0.2)], InputLaw::Iid { joint: coupled, within: None }, 0.2),
        ProtocolName::Rst2 => (8, vec![bsc(0.2)], InputLaw::Iid { joint: coupled, within: None }, 0.5),
        ProtocolName::Int2 | ProtocolName::Int3 => (
            6,
            vec![bsc(0.2), ChannelConfig::OnFirst { base: Box::new(bsc(0.3)), extra: vec![2] }],
            InputLaw::Iid { joint: coupled, within: None },
            0.5,
        ),
    };
    let delta = if protocol == ProtocolName::Rst1 { 0.15 } else { ProtocolParams::new(n).delta };
    let params = ProtocolParams {
        delta,
        delta_prime: if protocol == ProtocolName::Rst1 { 0.15 } else { ProtocolParams::new(n).delta_prime },
        delta_double_prime: if protocol == ProtocolName::Rst1 { 0.15 } else { ProtocolParams::new(n).delta_double_prime },
        delta_s,
        ..ProtocolParams::new(n)
    };
    ExperimentConfig {
        protocol,
        x_arity: 2,
        y_arity: 2,
        channels,
        inputs,
        center: CenterConfig::ExactType,
        params,
        mode: ModeName::Unbounded,
        newman_strings: None,
        trials: 1000,
        seed: 1,
        out: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates_and_runs() {
        for p in [
            ProtocolName::Estimate,
            ProtocolName::Sw1,
            ProtocolName::Sw2,
            ProtocolName::Sw3,
            ProtocolName::Rst1,
            ProtocolName::Rst2,
            ProtocolName::Int2,
            ProtocolName::Int3,
        ] {
            let mut c = preset(p);
            c.trials = 5;
            let out = run_experiment(&c).unwrap();
            assert_eq!(out.records.len(), 5, "{p:?}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let mut v = serde_json::to_value(preset(ProtocolName::Sw1)).unwrap();
        v["colour"] = serde_json::json!(1);
        let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
        let mut v = serde_json::to_value(preset(ProtocolName::Sw1)).unwrap();
        v["params"]["deltaa"] = serde_json::json!(1);
        assert!(ExperimentConfig::from_json(&v.to_string()).unwrap_err().to_string().contains("deltaa"));
    }

    #[test]
    fn wrong_channel_count_names_the_field() {
        let mut c = preset(ProtocolName::Rst1);
        c.channels.clear();
        assert!(c.validate().unwrap_err().to_string().contains("channels"));
    }

    #[test]
    fn zero_trials_give_a_header_only_csv() {
        let mut c = preset(ProtocolName::Sw1);
        c.trials = 0;
        let recs = run_trials(&c).unwrap();
        let mut buf = Vec::new();
        write_csv(&c, &recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("trial,protocol,seed,status"));
    }

    #[test]
    fn header_matches_between_empty_and_full_runs() {
        let mut c = preset(ProtocolName::Sw1);
        c.trials = 2;
        let mut full = Vec::new();
        write_csv(&c, &run_trials(&c).unwrap(), &mut full).unwrap();
        let mut empty = Vec::new();
        write_csv(&c, &[], &mut empty).unwrap();
        let first = |b: &[u8]| String::from_utf8(b.to_vec()).unwrap().lines().next().unwrap().to_string();
        assert_eq!(first(&full), first(&empty));
    }

    #[test]
    fn iid_within_yields_typical_inputs() {
        let c = preset(ProtocolName::Sw1);
        let prep = c.prepare().unwrap();
        let spec = TypicalSpec::new(prep.joint.clone().unwrap(), 0.2).unwrap();
        for t in 0..20 {
            let (x, y) = draw_inputs(&c, &prep, t).unwrap();
            assert!(crate::types::typical_member(&[&x, &y], &spec).unwrap());
        }
    }
}
