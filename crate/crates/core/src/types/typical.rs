use serde::{Deserialize, Serialize};

use super::enumerate::{compositions, enumerate_types, type_class_size};
use super::{pow_size, Caps, JointType, Seq};
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::info::Dist;

/// Slack on every l1 comparison; a distance exactly at the radius counts as inside.
pub const L1_TOL: f64 = 1e-12;

fn within(dist: f64, radius: f64) -> bool {
    dist <= radius + L1_TOL
}

/// An l1 ball of types around `center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalSpec {
    pub center: Dist,
    pub delta: f64,
}

impl TypicalSpec {
    pub fn new(center: Dist, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParam(format!("radius must be finite and >= 0, got {delta}")));
        }
        Ok(TypicalSpec { center, delta })
    }
}

/// Is the joint type of `seqs` within `delta` of the center?
pub fn typical_member(seqs: &[&Seq], spec: &TypicalSpec) -> Result<bool> {
    let t = JointType::of(seqs)?;
    Ok(within(t.l1_to(&spec.center)?, spec.delta))
}

fn check_two_coords(t_arities: &[usize], given: &Seq) -> Result<()> {
    if t_arities.len() != 2 {
        return Err(Error::Arity(format!("expected a two-coordinate type, got {t_arities:?}")));
    }
    if given.arity() != t_arities[1] {
        return Err(Error::AlphabetMismatch(vec![t_arities[1]], vec![given.arity()]));
    }
    Ok(())
}

/// All `x` with joint type `t(x, y) = t`, sorted lexicographically.
///
/// `t` lives on `X x Y`; `y` must have the `Y` marginal of `t`.
pub fn conditional_type_class(t: &JointType, y: &Seq, caps: &Caps) -> Result<Vec<Seq>> {
    check_two_coords(t.arities(), y)?;
    if y.len() != t.n() {
        return Err(Error::LengthMismatch(t.n(), y.len()));
    }
    if t.marginal(&[1])? != JointType::empirical(y) {
        return Err(Error::MarginalMismatch);
    }
    let (ax, ay) = (t.arities()[0], t.arities()[1]);
    let columns: Vec<JointType> = (0..ay)
        .filter(|&b| y.symbols().contains(&b))
        .map(|b| JointType { n: 0, arities: vec![ax], counts: (0..ax).map(|a| t.count(&[a, b])).collect() })
        .map(|mut c| {
            c.n = c.counts.iter().map(|&v| v as usize).sum();
            c
        })
        .collect();
    let size = columns.iter().fold(1u128, |acc, c| acc.saturating_mul(type_class_size(c)));
    caps.check_class(size)?;

    let blocks: Vec<usize> = (0..ay).filter(|b| y.symbols().contains(b)).collect();
    let positions: Vec<Vec<usize>> = blocks
        .iter()
        .map(|&b| (0..y.len()).filter(|&i| y.symbols()[i] == b).collect())
        .collect();
    let fillings: Vec<Vec<Seq>> = columns
        .iter()
        .map(|c| super::enumerate_type_class_cells(c, caps))
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(size as usize);
    let mut symbols = vec![0usize; y.len()];
    fill_blocks(0, &positions, &fillings, &mut symbols, &mut |s| {
        out.push(Seq { arity: ax, symbols: s.to_vec() });
    });
    out.sort();
    Ok(out)
}

fn fill_blocks(
    block: usize,
    positions: &[Vec<usize>],
    fillings: &[Vec<Seq>],
    symbols: &mut [usize],
    f: &mut impl FnMut(&[usize]),
) {
    if block == positions.len() {
        f(symbols);
        return;
    }
    for fill in &fillings[block] {
        for (&pos, &sym) in positions[block].iter().zip(fill.symbols()) {
            symbols[pos] = sym;
        }
        fill_blocks(block + 1, positions, fillings, symbols, f);
    }
}

/// `{x : ||t(x, y) - center||_1 <= delta}`, sorted lexicographically.
pub fn cond_typical_set(spec: &TypicalSpec, y: &Seq, caps: &Caps) -> Result<Vec<Seq>> {
    check_two_coords(spec.center.arities(), y)?;
    let (ax, ay) = (spec.center.arities()[0], spec.center.arities()[1]);
    caps.check_universe("conditional typical set", pow_size(ax, y.len()))?;
    let y_counts = JointType::empirical(y).counts;

    // Each candidate joint type splits every Y column independently.
    let mut columns: Vec<Vec<Vec<u32>>> = Vec::with_capacity(ay);
    for &c in &y_counts {
        let mut opts = Vec::new();
        let mut buf = vec![0u32; ax];
        compositions(c, 0, &mut buf, &mut |v| opts.push(v.to_vec()));
        columns.push(opts);
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; ay];
    loop {
        let mut counts = vec![0u32; ax * ay];
        for (b, &k) in choice.iter().enumerate() {
            for a in 0..ax {
                counts[a * ay + b] = columns[b][k][a];
            }
        }
        let t = JointType { n: y.len(), arities: vec![ax, ay], counts };
        if within(t.l1_to(&spec.center)?, spec.delta) {
            out.extend(conditional_type_class(&t, y, caps)?);
        }
        let mut b = 0;
        while b < ay {
            choice[b] += 1;
            if choice[b] < columns[b].len() {
                break;
            }
            choice[b] = 0;
            b += 1;
        }
        if b == ay {
            break;
        }
    }
    out.sort();
    Ok(out)
}

/// Channel-typical triples around a center on `S x R` with a channel `p(m | s)`.
///
/// A triple `(m, s, r)` is typical when `||t(s, r) - center|| <= delta` and
/// `||t(m, s, r) - p * t(s, r)|| <= delta_prime`. The sender (holding `s`) and the
/// receiver (holding `r`) can each only test whether *some* completion exists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelTypicalSpec {
    pub base: TypicalSpec,
    pub channel: Channel,
    pub delta_prime: f64,
}

impl ChannelTypicalSpec {
    pub fn new(base: TypicalSpec, channel: Channel, delta_prime: f64) -> Result<Self> {
        let ar = base.center.arities();
        if ar.len() != 2 {
            return Err(Error::Arity(format!("center must live on S x R, got {ar:?}")));
        }
        if channel.input_size() != ar[0] {
            return Err(Error::AlphabetMismatch(vec![ar[0]], vec![channel.input_size()]));
        }
        if !(delta_prime >= 0.0) || !delta_prime.is_finite() {
            return Err(Error::InvalidParam(format!("radius must be finite and >= 0, got {delta_prime}")));
        }
        Ok(ChannelTypicalSpec { base, channel, delta_prime })
    }

    fn sender_arity(&self) -> usize {
        self.base.center.arities()[0]
    }

    fn receiver_arity(&self) -> usize {
        self.base.center.arities()[1]
    }

    /// Full check on a realized triple.
    pub fn contains_triple(&self, m: &Seq, s: &Seq, r: &Seq) -> Result<bool> {
        let t_sr = JointType::of(&[s, r])?;
        if !within(t_sr.l1_to(&self.base.center)?, self.base.delta) {
            return Ok(false);
        }
        let t = JointType::of(&[m, s, r])?;
        let reference = self.channel.compose(&t_sr.to_dist())?;
        Ok(within(t.l1_to(&reference)?, self.delta_prime))
    }
}

/// Sender-side test: is there a `tau` on `M x S x R` with `tau(m, s) = t(m, s)` that
/// lies in the channel-typical set?
pub fn channel_typical_member_sender(m: &Seq, s: &Seq, spec: &ChannelTypicalSpec, caps: &Caps) -> Result<bool> {
    if s.arity() != spec.sender_arity() || m.arity() != spec.channel.output_arity() {
        return Err(Error::AlphabetMismatch(
            vec![spec.channel.output_arity(), spec.sender_arity()],
            vec![m.arity(), s.arity()],
        ));
    }
    let fixed = JointType::of(&[m, s])?;
    completion_exists(&fixed, true, spec, caps)
}

/// Receiver-side test: is there a `tau` with `tau(m, r) = t(m, r)` in the set?
pub fn channel_typical_member_receiver(m: &Seq, r: &Seq, spec: &ChannelTypicalSpec, caps: &Caps) -> Result<bool> {
    if r.arity() != spec.receiver_arity() || m.arity() != spec.channel.output_arity() {
        return Err(Error::AlphabetMismatch(
            vec![spec.channel.output_arity(), spec.receiver_arity()],
            vec![m.arity(), r.arity()],
        ));
    }
    let fixed = JointType::of(&[m, r])?;
    completion_exists(&fixed, false, spec, caps)
}

/// Exact search over integer completions of a fixed `(M, S)` or `(M, R)` marginal.
///
/// Both distances split into independent per-line sums, a line being all cells that
/// share the fixed input symbol. Each line contributes a Pareto frontier of
/// `(d1, d2)` pairs; the frontiers are summed and tested against the two radii.
fn completion_exists(fixed: &JointType, sender_fixed: bool, spec: &ChannelTypicalSpec, caps: &Caps) -> Result<bool> {
    let n = fixed.n() as f64;
    let ms = spec.channel.output_arity();
    let (ss, rs) = (spec.sender_arity(), spec.receiver_arity());
    let (lines, free) = if sender_fixed { (ss, rs) } else { (rs, ss) };
    let lim1 = n * (spec.base.delta + L1_TOL);
    let lim2 = n * (spec.delta_prime + L1_TOL);

    let center = |a: usize, f: usize| {
        let (s, r) = if sender_fixed { (a, f) } else { (f, a) };
        spec.base.center.probs()[s * rs + r] * n
    };
    let cond = |a: usize, f: usize, m: usize| {
        let s = if sender_fixed { a } else { f };
        spec.channel.prob(m, s)
    };

    let mut frontier = vec![(0.0f64, 0.0f64)];
    for a in 0..lines {
        let cells: Vec<u32> = (0..ms).map(|m| fixed.count(&[m, a])).collect();
        let total: u32 = cells.iter().sum();
        let center_row: Vec<f64> = (0..free).map(|f| center(a, f)).collect();
        let line = if total == 0 {
            vec![(center_row.iter().sum::<f64>(), 0.0)]
        } else {
            let work = cells
                .iter()
                .fold(1u128, |acc, &c| acc.saturating_mul(super::count_types(c as usize, free)));
            caps.check_universe("channel-typical completions", work)?;
            let p_row: Vec<Vec<f64>> = (0..free).map(|f| (0..ms).map(|m| cond(a, f, m)).collect()).collect();
            line_frontier(&cells, free, &center_row, &p_row, lim1, lim2)
        };
        let mut next = Vec::with_capacity(frontier.len() * line.len());
        for &(x1, x2) in &frontier {
            for &(y1, y2) in &line {
                let (d1, d2) = (x1 + y1, x2 + y2);
                if d1 <= lim1 && d2 <= lim2 {
                    next.push((d1, d2));
                }
            }
        }
        frontier = pareto(next);
        if frontier.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn line_frontier(cells: &[u32], free: usize, center_row: &[f64], p_row: &[Vec<f64>], lim1: f64, lim2: f64) -> Vec<(f64, f64)> {
    let ms = cells.len();
    let mut tau = vec![vec![0u32; free]; ms];
    let mut out = Vec::new();
    fill_line(0, cells, &mut tau, &mut |tau| {
        let sums: Vec<u32> = (0..free).map(|f| tau.iter().map(|row| row[f]).sum()).collect();
        let d1: f64 = sums.iter().zip(center_row).map(|(&v, &c)| (v as f64 - c).abs()).sum();
        if d1 > lim1 {
            return;
        }
        let mut d2 = 0.0;
        for (m, row) in tau.iter().enumerate() {
            for f in 0..free {
                d2 += (row[f] as f64 - p_row[f][m] * sums[f] as f64).abs();
            }
        }
        if d2 <= lim2 {
            out.push((d1, d2));
        }
    });
    pareto(out)
}

fn fill_line(m: usize, cells: &[u32], tau: &mut Vec<Vec<u32>>, f: &mut impl FnMut(&[Vec<u32>])) {
    if m == cells.len() {
        f(tau);
        return;
    }
    if cells[m] == 0 {
        tau[m].iter_mut().for_each(|v| *v = 0);
        fill_line(m + 1, cells, tau, f);
        return;
    }
    let mut buf = vec![0u32; tau[m].len()];
    let mut splits = Vec::new();
    compositions(cells[m], 0, &mut buf, &mut |v| splits.push(v.to_vec()));
    for split in splits {
        tau[m] = split;
        fill_line(m + 1, cells, tau, f);
    }
}

fn pareto(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        if out.last().is_none_or(|last| p.1 < last.1) {
            out.push(p);
        }
    }
    out
}

/// `P[ ||t(M^n, x, y) - p * t(x, y)||_1 <= delta_prime ]` for `M^n ~ p^n(. | x)`, summed exactly.
pub fn channel_typical_prob(channel: &Channel, x: &Seq, y: &Seq, delta_prime: f64, caps: &Caps) -> Result<f64> {
    if x.arity() != channel.input_size() {
        return Err(Error::AlphabetMismatch(vec![channel.input_size()], vec![x.arity()]));
    }
    let n = x.len();
    let ms = channel.output_arity();
    caps.check_universe("channel output sequences", pow_size(ms, n))?;
    let t_xy = JointType::of(&[x, y])?;
    let reference = channel.compose(&t_xy.to_dist())?;
    let xy_cells: Vec<usize> = (0..n).map(|i| x.symbols()[i] * y.arity() + y.symbols()[i]).collect();
    let cells = t_xy.cells();
    let mut counts = vec![0u32; ms * cells];
    let mut total = 0.0;
    let lim = delta_prime + L1_TOL;
    walk_outputs(0, 1.0, &xy_cells, x, channel, &mut counts, &mut |counts, p| {
        let d: f64 = counts
            .iter()
            .zip(reference.probs())
            .map(|(&c, &q)| (c as f64 / n as f64 - q).abs())
            .sum();
        if d <= lim {
            total += p;
        }
    });
    Ok(total)
}

fn walk_outputs(
    i: usize,
    prob: f64,
    xy_cells: &[usize],
    x: &Seq,
    channel: &Channel,
    counts: &mut [u32],
    f: &mut impl FnMut(&[u32], f64),
) {
    if i == xy_cells.len() {
        f(counts, prob);
        return;
    }
    let cells = counts.len() / channel.output_arity();
    for m in 0..channel.output_arity() {
        let q = channel.prob(m, x.symbols()[i]);
        if q == 0.0 {
            continue;
        }
        counts[m * cells + xy_cells[i]] += 1;
        walk_outputs(i + 1, prob * q, xy_cells, x, channel, counts, f);
        counts[m * cells + xy_cells[i]] -= 1;
    }
}

/// Does `{channel-typical around center}` sit inside the `delta + delta_prime` ball
/// around `p * center` for every triple of length `n`?
///
/// Membership on both sides depends only on the joint type, so checking every type
/// with denominator `n` on `M x S x R` covers every triple.
pub fn merge_set_check(spec: &ChannelTypicalSpec, n: usize, caps: &Caps) -> Result<bool> {
    let ms = spec.channel.output_arity();
    let (ss, rs) = (spec.sender_arity(), spec.receiver_arity());
    let big = spec.channel.compose(&spec.base.center)?;
    let radius = spec.base.delta + spec.delta_prime;
    for t in enumerate_types(n, &[ms, ss, rs], caps)? {
        let t_sr = t.marginal(&[1, 2])?;
        if !within(t_sr.l1_to(&spec.base.center)?, spec.base.delta) {
            continue;
        }
        let reference = spec.channel.compose(&t_sr.to_dist())?;
        if !within(t.l1_to(&reference)?, spec.delta_prime) {
            continue;
        }
        if !within(t.l1_to(&big)?, radius) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(arity: usize, s: &[usize]) -> Seq {
        Seq::new(arity, s.to_vec()).unwrap()
    }

    #[test]
    fn conditional_class_example() {
        let y = seq(2, &[0, 0, 1, 1]);
        let x = seq(2, &[0, 1, 0, 1]);
        let t = JointType::of(&[&x, &y]).unwrap();
        let class = conditional_type_class(&t, &y, &Caps::default()).unwrap();
        let got: Vec<Vec<usize>> = class.iter().map(|s| s.symbols().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 1, 0, 1], vec![0, 1, 1, 0], vec![1, 0, 0, 1], vec![1, 0, 1, 0]]);
    }

    #[test]
    fn conditional_class_needs_matching_marginal() {
        let y = seq(2, &[0, 0, 0, 1]);
        let t = JointType::new(vec![2, 2], vec![1, 1, 1, 1]).unwrap();
        assert!(matches!(
            conditional_type_class(&t, &y, &Caps::default()),
            Err(Error::MarginalMismatch)
        ));
    }

    #[test]
    fn cond_typical_set_matches_brute_force() {
        let center = Dist::new(vec![2, 2], vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let y = seq(2, &[0, 1, 1, 0, 1, 0]);
        for delta in [0.0, 0.2, 0.5, 1.0] {
            let spec = TypicalSpec::new(center.clone(), delta).unwrap();
            let fast = cond_typical_set(&spec, &y, &Caps::default()).unwrap();
            let brute: Vec<Seq> = Seq::all(2, 6, &Caps::default())
                .unwrap()
                .into_iter()
                .filter(|x| typical_member(&[x, &y], &spec).unwrap())
                .collect();
            assert_eq!(fast, brute, "delta = {delta}");
        }
    }

    #[test]
    fn boundary_tie_counts_as_inside() {
        let center = Dist::new(vec![2], vec![0.5, 0.5]).unwrap();
        let x = seq(2, &[0, 0, 0, 1]);
        assert!(typical_member(&[&x], &TypicalSpec::new(center.clone(), 0.5).unwrap()).unwrap());
        assert!(!typical_member(&[&x], &TypicalSpec::new(center, 0.49).unwrap()).unwrap());
    }

    fn bsc_spec(delta: f64, delta_prime: f64) -> ChannelTypicalSpec {
        let center = Dist::new(vec![2, 2], vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        ChannelTypicalSpec::new(TypicalSpec::new(center, delta).unwrap(), Channel::bsc(0.25).unwrap(), delta_prime)
            .unwrap()
    }

    /// Brute-force oracle: search every partner sequence for a typical triple.
    fn brute_sender(m: &Seq, s: &Seq, spec: &ChannelTypicalSpec) -> bool {
        Seq::all(2, s.len(), &Caps::default())
            .unwrap()
            .iter()
            .any(|r| spec.contains_triple(m, s, r).unwrap())
    }

    fn brute_receiver(m: &Seq, r: &Seq, spec: &ChannelTypicalSpec) -> bool {
        Seq::all(2, r.len(), &Caps::default())
            .unwrap()
            .iter()
            .any(|s| spec.contains_triple(m, s, r).unwrap())
    }

    #[test]
    fn completion_search_agrees_with_brute_force() {
        let caps = Caps::default();
        let all = Seq::all(2, 5, &caps).unwrap();
        for (delta, delta_prime) in [(0.2, 0.2), (0.4, 0.3), (0.1, 0.6), (0.0, 1.0)] {
            let spec = bsc_spec(delta, delta_prime);
            for m in all.iter().step_by(3) {
                for s in all.iter().step_by(2) {
                    assert_eq!(
                        channel_typical_member_sender(m, s, &spec, &caps).unwrap(),
                        brute_sender(m, s, &spec),
                    );
                    assert_eq!(
                        channel_typical_member_receiver(m, s, &spec, &caps).unwrap(),
                        brute_receiver(m, s, &spec),
                    );
                }
            }
        }
    }

    #[test]
    fn merge_set_holds_for_small_cases() {
        for (delta, delta_prime) in [(0.1, 0.1), (0.25, 0.2), (0.5, 0.5)] {
            assert!(merge_set_check(&bsc_spec(delta, delta_prime), 4, &Caps::default()).unwrap());
        }
    }

    #[test]
    fn channel_typical_prob_of_noiseless_channel_is_one() {
        let ch = Channel::identity(2).unwrap();
        let x = seq(2, &[0, 1, 1, 0]);
        let y = seq(2, &[1, 1, 0, 0]);
        assert!((channel_typical_prob(&ch, &x, &y, 0.0, &Caps::default()).unwrap() - 1.0).abs() < 1e-12);
    }
}
