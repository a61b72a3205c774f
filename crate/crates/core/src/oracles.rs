//! Independent checks: Monte-Carlo distance estimates with confidence intervals,
//! closed-form tail bounds, exhaustive cardinality sweeps and a second evaluator of
//! the rate formulas.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::info::{
    conditional_entropy, gamma_bound, kl_divergence, l1_distance, mutual_information, shannon_entropy, Dist,
};
use crate::protocols::{rate_bounds, ProtocolParams, RateBounds};
use crate::types::{
    channel_typical_member_receiver, cond_typical_set, conditional_type_class, enumerate_types, type_class_size,
    Caps, ChannelTypicalSpec, JointType, Seq, TypicalSpec,
};

const Z95: f64 = 1.96;

/// A Monte-Carlo point estimate with a 95% half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub point: f64,
    pub trials: u64,
    pub ci95: f64,
}

impl MCEstimate {
    /// Frequency of `hits` in `trials`, with a normal-approximation interval.
    pub fn proportion(hits: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::NoSuccessfulTrials);
        }
        let p = hits as f64 / trials as f64;
        Ok(MCEstimate { point: p, trials, ci95: Z95 * (p * (1.0 - p) / trials as f64).sqrt() })
    }

    /// One standard error.
    pub fn sigma(&self) -> f64 {
        self.ci95 / Z95
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    VacuousPass,
    Fail,
}

/// Serde for bounds that may be `+inf`, written as JSON `null`.
pub mod unbounded {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }

    /// The same, for every value of a map.
    pub mod values {
        use super::*;

        pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
            s.collect_map(m.iter().map(|(k, v)| (k, v.is_finite().then_some(*v))))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
            let m = BTreeMap::<String, Option<f64>>::deserialize(d)?;
            Ok(m.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::INFINITY))).collect())
        }
    }
}

/// One bound checked against a measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    /// `null` in JSON when the bound is infinite.
    #[serde(with = "unbounded")]
    pub bound_value: f64,
    pub vacuous: bool,
    pub measured: MCEstimate,
    /// Multiples of `ci95` granted to the measurement.
    pub slack_ci: f64,
    pub verdict: Verdict,
}

impl BoundReport {
    /// `vacuous_at` is the value from which the bound says nothing (1 for a
    /// probability, 2 for an l1 distance between laws).
    pub fn new(name: impl Into<String>, bound_value: f64, vacuous_at: f64, measured: MCEstimate, slack_ci: f64) -> Self {
        let vacuous = !(bound_value < vacuous_at);
        let verdict = if vacuous {
            Verdict::VacuousPass
        } else if measured.point - slack_ci * measured.ci95 > bound_value {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        BoundReport { name: name.into(), bound_value, vacuous, measured, slack_ci, verdict }
    }

    pub fn probability(name: impl Into<String>, bound_value: f64, measured: MCEstimate, slack_ci: f64) -> Self {
        BoundReport::new(name, bound_value, 1.0, measured, slack_ci)
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

/// Distance between the law of successful runs and an exact reference law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    /// l1 distance between the empirical histogram and the reference.
    pub l1: MCEstimate,
    pub successes: u64,
    pub trials: u64,
}

/// Runs `run(trial)` for every trial, keeps the outcomes of successful runs (`Some`),
/// and measures their empirical law against `reference` (indexed by outcome).
///
/// The interval is `2 * 1.96 * sqrt(K / (4 N))` on the l1 scale, with `K` the size of
/// the joint support and `N` the successes kept.
pub fn mc_conditional_tv<F>(reference: &[f64], trials: u64, run: F) -> Result<TvEstimate>
where
    F: Fn(u64) -> Result<Option<usize>> + Sync,
{
    let outcomes: Vec<Option<usize>> = (0..trials).into_par_iter().map(&run).collect::<Result<_>>()?;
    tv_from_outcomes(reference, &outcomes)
}

/// The histogram step of [`mc_conditional_tv`] for outcomes already collected; `None`
/// marks an aborted run.
pub fn tv_from_outcomes(reference: &[f64], outcomes: &[Option<usize>]) -> Result<TvEstimate> {
    let mut hist = vec![0u64; reference.len()];
    let mut successes = 0u64;
    for &o in outcomes.iter().flatten() {
        if o >= hist.len() {
            return Err(Error::InvalidParam(format!("outcome {o} outside the reference support")));
        }
        hist[o] += 1;
        successes += 1;
    }
    if successes == 0 {
        return Err(Error::NoSuccessfulTrials);
    }
    let n = successes as f64;
    let l1: f64 = hist.iter().zip(reference).map(|(&c, &p)| (c as f64 / n - p).abs()).sum();
    let support = hist.iter().zip(reference).filter(|(&c, &p)| c > 0 || p > 0.0).count() as f64;
    let ci95 = 2.0 * Z95 * (support / (4.0 * n)).sqrt();
    Ok(TvEstimate { l1: MCEstimate { point: l1, trials: successes, ci95 }, successes, trials: outcomes.len() as u64 })
}

/// `exp(-mu eps^2 / 2)` with `mu = u v / q`: two random subsets of sizes `u`, `v` of a
/// `q`-set overlapping in more than `(1 + eps) mu` or fewer than `(1 - eps) mu` points.
pub fn bound_eval_hoeffding(u: u64, v: u64, q: u64, eps: f64) -> Result<f64> {
    if q == 0 || u > q || v > q {
        return Err(Error::InvalidParam(format!("need u, v <= q and q >= 1, got u={u} v={v} q={q}")));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParam(format!("eps must be finite and >= 0, got {eps}")));
    }
    let mu = u as f64 * v as f64 / q as f64;
    Ok((-mu * eps * eps / 2.0).exp())
}

/// `exp(-2 n delta^2)` for the mean of `n` independent trials.
pub fn bound_eval_chernoff(n: u64, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParam(format!("delta must be finite and >= 0, got {delta}")));
    }
    Ok((-2.0 * n as f64 * delta * delta).exp())
}

/// One cardinality bound that did not hold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub witness: String,
    pub log2_size: f64,
    pub log2_lower: f64,
    pub log2_upper: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CardinalityReport {
    pub checks: u64,
    pub violations: Vec<Violation>,
}

impl CardinalityReport {
    fn check(&mut self, check: &str, witness: impl FnOnce() -> String, size: u128, lower: f64, upper: f64) {
        self.checks += 1;
        let s = (size as f64).log2();
        let below = size > 0 && s < lower - 1e-9;
        let empty_but_required = size == 0 && lower > f64::NEG_INFINITY;
        if below || empty_but_required || s > upper + 1e-9 {
            self.violations.push(Violation {
                check: check.to_string(),
                witness: witness(),
                log2_size: s,
                log2_lower: lower,
                log2_upper: upper,
            });
        }
    }

    pub fn merge(&mut self, other: CardinalityReport) {
        self.checks += other.checks;
        self.violations.extend(other.violations);
    }
}

/// A fixed sequence with the given single-coordinate type (symbols in ascending order).
pub fn representative(t: &JointType) -> Seq {
    let symbols = t.counts().iter().enumerate().flat_map(|(s, &c)| std::iter::repeat_n(s, c as usize)).collect();
    Seq::new(t.cells(), symbols).expect("counts index valid symbols")
}

/// A channel from an `x_arity`-letter input to a binary output, used by the sweeps.
fn sweep_channel(x_arity: usize) -> Result<Channel> {
    let table = (0..x_arity)
        .flat_map(|a| {
            let p = if x_arity == 1 { 0.3 } else { 0.1 + 0.7 * a as f64 / (x_arity - 1) as f64 };
            [1.0 - p, p]
        })
        .collect();
    Channel::new(vec![x_arity], 2, table)
}

const SWEEP_DELTAS: [f64; 3] = [0.0, 0.2, 0.5];
const SWEEP_CHANNEL_DELTAS: [(f64, f64); 2] = [(0.0, 0.1), (0.2, 0.2)];

/// Every cardinality statement at one `(n, |X|, |Y|)`, each joint type serving as center.
pub fn verify_cardinalities_at(n: usize, ax: usize, ay: usize, caps: &Caps) -> Result<CardinalityReport> {
    let types = enumerate_types(n, &[ax, ay], caps)?;
    let sizes: Vec<u128> = types.iter().map(type_class_size).collect();
    let cells = (ax * ay) as f64;
    let ln1 = ((n + 1) as f64).log2();
    let nf = n as f64;
    let channel = sweep_channel(ax)?;
    let am = channel.output_arity();
    let y_types = enumerate_types(n, &[ay], caps)?;

    let reports: Vec<CardinalityReport> = types
        .par_iter()
        .zip(&sizes)
        .map(|(t, &size)| -> Result<CardinalityReport> {
            let mut rep = CardinalityReport::default();
            let center = t.to_dist();
            let h_xy = shannon_entropy(&center, &[0, 1])?;
            let h_x_given_y = conditional_entropy(&center, &[0], &[1])?;
            let name = || format!("n={n} type={:?}", t.counts());

            // Joint type class.
            rep.check("card_typ_class/joint", name, size, nf * h_xy - cells * ln1, nf * h_xy);
            // Marginal type class.
            let tx = t.marginal(&[0])?;
            let hx = shannon_entropy(&tx.to_dist(), &[0])?;
            rep.check("card_typ_class/marginal", name, type_class_size(&tx), nf * hx - ax as f64 * ln1, nf * hx);

            // Conditional class and the partition identity.
            let ty = t.marginal(&[1])?;
            let y = representative(&ty);
            let cond = conditional_type_class(t, &y, caps)?.len() as u128;
            rep.check("cond_typ_class_card", name, cond, nf * h_x_given_y - cells * ln1, nf * h_x_given_y + cells * ln1);
            rep.checks += 1;
            if type_class_size(&ty) * cond != size {
                rep.violations.push(Violation {
                    check: "cond_typ_class/partition".into(),
                    witness: name(),
                    log2_size: (size as f64).log2(),
                    log2_lower: ((type_class_size(&ty) * cond) as f64).log2(),
                    log2_upper: ((type_class_size(&ty) * cond) as f64).log2(),
                });
            }

            for &delta in &SWEEP_DELTAS {
                let name = || format!("n={n} type={:?} delta={delta}", t.counts());
                // Joint typical set: exact size as a sum of class sizes.
                let total: u128 = types
                    .iter()
                    .zip(&sizes)
                    .filter(|(u, _)| u.l1_to(&center).is_ok_and(|d| d <= delta + crate::types::L1_TOL))
                    .map(|(_, &s)| s)
                    .sum();
                let g = gamma_bound(ax * ay - 1, delta)?;
                rep.check(
                    "card_joint_typ_set",
                    name,
                    total,
                    nf * (h_xy - g) - cells * ln1,
                    nf * (h_xy + g) + cells * ln1,
                );

                // Conditionally typical set, for one y of each type.
                let spec = TypicalSpec::new(center.clone(), delta)?;
                let gx = gamma_bound(ax, delta)?;
                for yt in &y_types {
                    let yy = representative(yt);
                    let size = cond_typical_set(&spec, &yy, caps)?.len() as u128;
                    let lower = if *yt == ty { nf * (h_x_given_y - gx) - cells * ln1 } else { f64::NEG_INFINITY };
                    let name = || format!("n={n} type={:?} delta={delta} y_type={:?}", t.counts(), yt.counts());
                    rep.check("card_cond_typ_set", name, size, lower, nf * (h_x_given_y + gx) + 2.0 * cells * ln1);
                }
            }

            // Receiver-side channel-typical set, for y of the center's Y type.
            let joint = channel.compose(&center)?;
            let h_m_given_y = conditional_entropy(&joint, &[0], &[2])?;
            let all_m = Seq::all(am, n, caps)?;
            for &(delta, delta_prime) in &SWEEP_CHANNEL_DELTAS {
                let spec = ChannelTypicalSpec::new(TypicalSpec::new(center.clone(), delta)?, channel.clone(), delta_prime)?;
                let mut count = 0u128;
                for m in &all_m {
                    if channel_typical_member_receiver(m, &y, &spec, caps)? {
                        count += 1;
                    }
                }
                let upper = nf * (h_m_given_y + gamma_bound(am, ax as f64 * delta_prime)?) + 2.0 * (am * ay) as f64 * ln1;
                let name = || format!("n={n} type={:?} delta={delta} delta'={delta_prime}", t.counts());
                rep.check("card_cond_bs_set", name, count, f64::NEG_INFINITY, upper);
            }
            Ok(rep)
        })
        .collect::<Result<_>>()?;
    let mut out = CardinalityReport::default();
    for r in reports {
        out.merge(r);
    }
    Ok(out)
}

/// The full sweep: every `n` in `1..=n_max` for each `(|X|, |Y|)` pair.
pub fn verify_cardinality_suite(plan: &[(usize, usize, usize)], caps: &Caps) -> Result<CardinalityReport> {
    let mut out = CardinalityReport::default();
    for &(n_max, ax, ay) in plan {
        for n in 1..=n_max {
            out.merge(verify_cardinalities_at(n, ax, ay, caps)?);
        }
    }
    Ok(out)
}

/// Worst residuals of the basic identities over random instances.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub instances: usize,
    pub chain_rule: f64,
    pub symmetry: f64,
    /// Largest `(1 / 2 ln 2) ||p - q||^2 - D(p || q)`; must stay `<= 0`.
    pub pinsker: f64,
    /// Largest `|H(X|Y)_p - H(X|Y)_q| - gamma(|X|, ||p - q||)`; must stay `<= 0`.
    pub continuity: f64,
}

impl IdentityReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.chain_rule <= tol && self.symmetry <= tol && self.pinsker <= tol && self.continuity <= tol
    }
}

fn random_dist(rng: &mut ChaCha8Rng, arities: Vec<usize>) -> Dist {
    let len: usize = arities.iter().product();
    let sparse = rng.gen_bool(0.2);
    let mut w: Vec<f64> = (0..len).map(|_| if sparse && rng.gen_bool(0.3) { 0.0 } else { rng.gen::<f64>() }).collect();
    if w.iter().all(|&v| v == 0.0) {
        w[0] = 1.0;
    }
    Dist::from_weights(arities, w).expect("positive total weight")
}

/// Chain rule, symmetry of mutual information, Pinsker and the conditional-entropy
/// continuity bound on `instances` random distributions each.
pub fn info_identity_suite(instances: usize, seed: u64) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = IdentityReport { instances, ..Default::default() };
    for _ in 0..instances {
        let ax = rng.gen_range(2..=4);
        let ay = rng.gen_range(2..=4);
        let p = random_dist(&mut rng, vec![ax, ay]);
        let chain = shannon_entropy(&p, &[0, 1])? - shannon_entropy(&p, &[0])? - conditional_entropy(&p, &[1], &[0])?;
        rep.chain_rule = rep.chain_rule.max(chain.abs());
        let sym = mutual_information(&p, &[0], &[1])? - mutual_information(&p, &[1], &[0])?;
        rep.symmetry = rep.symmetry.max(sym.abs());

        let q = random_dist(&mut rng, vec![ax, ay]);
        let d = kl_divergence(&p, &q)?;
        let l1 = l1_distance(&p, &q)?;
        if d.is_finite() {
            rep.pinsker = rep.pinsker.max(l1 * l1 / (2.0 * std::f64::consts::LN_2) - d);
        }

        // A nearby law at l1 distance at most 1/2.
        let lambda = rng.gen::<f64>();
        let mixed: Vec<f64> = p.probs().iter().zip(q.probs()).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect();
        let near = Dist::from_weights(vec![ax, ay], mixed)?;
        let dist = l1_distance(&p, &near)?;
        if dist <= 0.5 {
            let gap = (conditional_entropy(&p, &[0], &[1])? - conditional_entropy(&near, &[0], &[1])?).abs();
            rep.continuity = rep.continuity.max(gap - gamma_bound(ax, dist)?);
        }
    }
    Ok(rep)
}

/// A second evaluator of the rate formulas, written against raw probability tables.
mod dual {
    fn lg(v: f64) -> f64 {
        v.log2()
    }

    fn ent(p: &[f64]) -> f64 {
        p.iter().map(|&v| if v > 0.0 { -v * lg(v) } else { 0.0 }).sum()
    }

    fn gam(d: f64, x: f64) -> f64 {
        x * lg(d) + ent(&[x, 1.0 - x])
    }

    pub struct Rates {
        pub c_sw: f64,
        pub eta1: f64,
        pub r: f64,
        pub c: f64,
        pub eta2: f64,
        pub eta3: f64,
    }

    /// `t[x][y]`, `ch[x][m]`.
    #[allow(clippy::too_many_arguments)]
    pub fn eval(t: &[Vec<f64>], ch: &[Vec<f64>], n: f64, d: f64, dp: f64, ddp: f64, k1: f64, k3: f64) -> Rates {
        let (nx, ny, nm) = (t.len(), t[0].len(), ch[0].len());
        let (fx, fy, fm) = (nx as f64, ny as f64, nm as f64);
        let l = lg(n + 1.0);
        // H(X|Y) = H(X,Y) - H(Y).
        let hxy = ent(&t.iter().flatten().copied().collect::<Vec<_>>());
        let py: Vec<f64> = (0..ny).map(|y| (0..nx).map(|x| t[x][y]).sum()).collect();
        let hx_y = hxy - ent(&py);
        // Joint q(m,x,y) = ch[x][m] t[x][y].
        let mut q = vec![vec![vec![0.0; ny]; nx]; nm];
        for m in 0..nm {
            for x in 0..nx {
                for y in 0..ny {
                    q[m][x][y] = ch[x][m] * t[x][y];
                }
            }
        }
        let hmxy = ent(&q.iter().flatten().flatten().copied().collect::<Vec<_>>());
        let h_m_xy = hmxy - hxy;
        let qmy: Vec<f64> = (0..nm).flat_map(|m| (0..ny).map(move |y| (m, y))).map(|(m, y)| (0..nx).map(|x| q[m][x][y]).sum()).collect();
        // I(M;X|Y) = H(M|Y) - H(M|X,Y).
        let i_mx_y = (ent(&qmy) - ent(&py)) - h_m_xy;
        let lle = lg(lg(std::f64::consts::E));
        let c_sw = hx_y + gam(fx, d) + 2.0 * fx * fy * l / n + d + 1.0 / n;
        let eta1 = 2.0 * gam(fx, d) + 2.0 * fx * fy * l / n + lg(n) / n + 3.0 * d + k1 / n;
        let r = h_m_xy - gam(fm, d) - gam(fm, dp) - fm * fx * l / n + lle / n - 1.0 / n - lg(n) / n;
        let c = i_mx_y + gam(fm, fx * dp) + gam(fm, d) + gam(fm, dp) + 3.0 * fm * fx * fy * l / n + d + 1.0 / n + lg(n) / n;
        let dmax = d.max(dp).max(ddp);
        let eta2 = 5.0 * gam(fm, fx * fy * dmax) + 4.0 * fm * fx * fy * l / n + 2.0 * lg(n) / n + 3.0 * dmax + k1 / n;
        let eta3 = 5.0 * gam(fm, fx * fy * dmax) + 2.0 * lg(n) / n + 4.0 * fm * fx * fy * l / n + 3.0 * dmax + k3 / n;
        Rates { c_sw, eta1, r, c, eta2, eta3 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    pub instances: usize,
    /// Instances skipped because a radius left the continuity term's domain.
    pub skipped: usize,
    pub max_abs_diff: f64,
    pub worst: Option<String>,
}

fn dual_diff(params: &ProtocolParams, t: &Dist, ch: &Channel) -> Result<Option<f64>> {
    let b: RateBounds = match rate_bounds(params, t, ch) {
        Ok(b) => b,
        Err(Error::DeltaOutOfDomain(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let (ax, ay) = (t.arities()[0], t.arities()[1]);
    let tt: Vec<Vec<f64>> = (0..ax).map(|x| (0..ay).map(|y| t.prob(&[x, y])).collect()).collect();
    let cc: Vec<Vec<f64>> = (0..ax).map(|x| ch.row(x).to_vec()).collect();
    let o = params.o_constants;
    let d = dual::eval(
        &tt,
        &cc,
        params.n as f64,
        params.delta,
        params.delta_prime,
        params.delta_double_prime,
        o.per_n,
        o.per_n_round,
    );
    let diffs = [
        b.c_sw - d.c_sw,
        b.eta1 - d.eta1,
        b.r - d.r,
        b.c - d.c,
        b.eta2 - d.eta2,
        b.eta3 - d.eta3,
    ];
    Ok(Some(diffs.iter().fold(0.0f64, |a, v| a.max(v.abs()))))
}

/// Compares [`rate_bounds`] with the second evaluator on random instances.
pub fn dual_formula_check(instances: usize, seed: u64) -> Result<DualReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = DualReport { instances, ..Default::default() };
    for i in 0..instances {
        let ax = rng.gen_range(1..=4);
        let ay = rng.gen_range(1..=4);
        let am = rng.gen_range(1..=5);
        let t = random_dist(&mut rng, vec![ax, ay]);
        let table: Vec<f64> = (0..ax).flat_map(|_| random_dist(&mut rng, vec![am]).probs().to_vec()).collect();
        let ch = Channel::new(vec![ax], am, table)?;
        let params = ProtocolParams {
            delta: rng.gen_range(0.0..0.3),
            delta_prime: rng.gen_range(0.0..0.3),
            delta_double_prime: rng.gen_range(0.0..0.3),
            ..ProtocolParams::new(rng.gen_range(1..5000))
        };
        match dual_diff(&params, &t, &ch)? {
            None => rep.skipped += 1,
            Some(diff) => {
                if diff > rep.max_abs_diff {
                    rep.max_abs_diff = diff;
                    rep.worst = Some(format!("instance {i}: n={} |X|={ax} |Y|={ay} |M|={am}", params.n));
                }
            }
        }
    }
    Ok(rep)
}

/// The dual evaluator on one given instance.
pub fn dual_formula_diff(params: &ProtocolParams, center: &Dist, channel: &Channel) -> Result<Option<f64>> {
    dual_diff(params, center, channel)
}
