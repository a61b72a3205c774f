//! Rate choices and slack terms, evaluated verbatim with explicit constants in place
//! of the asymptotic remainders.

use serde::{Deserialize, Serialize};

use super::ProtocolParams;
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::info::{conditional_entropy, conditional_mutual_information, gamma_bound, Dist};

/// `log2(log2(e))`.
pub fn log_log_e() -> f64 {
    std::f64::consts::LOG2_E.log2()
}

fn log_n1(n: usize) -> f64 {
    ((n + 1) as f64).log2()
}

fn two_coords(t: &Dist) -> Result<(usize, usize)> {
    match t.arities() {
        [a, b] => Ok((*a, *b)),
        other => Err(Error::Arity(format!("expected a distribution on X x Y, got {other:?}"))),
    }
}

/// Per-symbol rate of the one-way side-information code:
/// `H(X|Y) + gamma(|X|, delta) + (2/n)|X||Y| log(n+1) + delta + 1/n`.
pub fn sw_rate(params: &ProtocolParams, center: &Dist) -> Result<f64> {
    let (ax, ay) = two_coords(center)?;
    let n = params.n as f64;
    Ok(conditional_entropy(center, &[0], &[1])?
        + gamma_bound(ax, params.delta)?
        + 2.0 / n * (ax * ay) as f64 * log_n1(params.n)
        + params.delta
        + 1.0 / n)
}

/// Slack of the one-way code: `2 gamma(|X|, delta) + (2/n)|X||Y| log(n+1) + (1/n) log n + 3 delta + c/n`.
pub fn eta1(params: &ProtocolParams, ax: usize, ay: usize) -> Result<f64> {
    let n = params.n as f64;
    Ok(2.0 * gamma_bound(ax, params.delta)?
        + 2.0 / n * (ax * ay) as f64 * log_n1(params.n)
        + n.log2() / n
        + 3.0 * params.delta
        + params.o_constants.per_n / n)
}

/// The shared-bit rate `R` and communication rate `C` of one channel-simulation round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationRates {
    pub r: f64,
    pub c: f64,
}

/// `R` and `C` for a center on `S x R` and a channel `p(m | s)`.
pub fn simulation_rates(params: &ProtocolParams, center: &Dist, channel: &Channel) -> Result<SimulationRates> {
    simulation_rates_with(params, params.delta, center, channel)
}

pub(crate) fn simulation_rates_with(
    params: &ProtocolParams,
    delta: f64,
    center: &Dist,
    channel: &Channel,
) -> Result<SimulationRates> {
    rates_impl(params, delta, center, channel, gamma_bound)
}

/// As [`simulation_rates_with`], but a continuity term whose radius leaves `[0, 1]`
/// counts as unbounded slack: `C` becomes infinite (the full message is sent) and `R`
/// minus infinity (no rate bits).
pub(crate) fn simulation_rates_saturating(
    params: &ProtocolParams,
    delta: f64,
    center: &Dist,
    channel: &Channel,
) -> Result<SimulationRates> {
    rates_impl(params, delta, center, channel, |d, r| match gamma_bound(d, r) {
        Err(Error::DeltaOutOfDomain(_)) => Ok(f64::INFINITY),
        other => other,
    })
}

fn rates_impl(
    params: &ProtocolParams,
    delta: f64,
    center: &Dist,
    channel: &Channel,
    gamma_bound: impl Fn(usize, f64) -> Result<f64>,
) -> Result<SimulationRates> {
    let (ax, ay) = two_coords(center)?;
    if channel.input_size() != ax {
        return Err(Error::AlphabetMismatch(vec![ax], vec![channel.input_size()]));
    }
    let am = channel.output_arity();
    let n = params.n as f64;
    let dp = params.delta_prime;
    let joint = channel.compose(center)?;
    let h_m_xy = conditional_entropy(&joint, &[0], &[1, 2])?;
    let i_mx_y = conditional_mutual_information(&joint, &[0], &[1], &[2])?;
    let mxy = (am * ax * ay) as f64;
    let r = h_m_xy - gamma_bound(am, delta)? - gamma_bound(am, dp)? - (am * ax) as f64 / n * log_n1(params.n)
        + log_log_e() / n
        - 1.0 / n
        - n.log2() / n;
    let c = i_mx_y
        + gamma_bound(am, ax as f64 * dp)?
        + gamma_bound(am, delta)?
        + gamma_bound(am, dp)?
        + 3.0 / n * mxy * log_n1(params.n)
        + delta
        + 1.0 / n
        + n.log2() / n;
    Ok(SimulationRates { r, c })
}

/// `delta''' = delta'^2 / (2 ln 2) - (2/n)|M||X||Y| log(n+1)`.
pub fn delta_triple_prime(params: &ProtocolParams, am: usize, ax: usize, ay: usize) -> f64 {
    let n = params.n as f64;
    params.delta_prime.powi(2) / (2.0 * std::f64::consts::LN_2) - 2.0 / n * (am * ax * ay) as f64 * log_n1(params.n)
}

/// Slack of a simulation round at `delta_max`:
/// `5 gamma(|M|, |X||Y| d) + (4/n)|M||X||Y| log(n+1) + (2/n) log n + 3 d + c/n`.
pub fn eta2(params: &ProtocolParams, am: usize, ax: usize, ay: usize, delta_max: f64) -> Result<f64> {
    let n = params.n as f64;
    Ok(5.0 * gamma_bound(am, (ax * ay) as f64 * delta_max)?
        + 4.0 / n * (am * ax * ay) as f64 * log_n1(params.n)
        + 2.0 * n.log2() / n
        + 3.0 * delta_max
        + params.o_constants.per_n / n)
}

/// Slack of a `j`-round simulation.
///
/// `m_max` is the largest message alphabet and `m_all` the product of all of them.
pub fn eta3(params: &ProtocolParams, ax: usize, ay: usize, m_max: usize, m_all: usize, j: usize) -> Result<f64> {
    let n = params.n as f64;
    let jf = j as f64;
    let d = delta_max_rounds(params, j);
    Ok(5.0 * jf * gamma_bound(m_max, (ax * ay) as f64 * d)?
        + 2.0 * jf / n * n.log2()
        + 4.0 * jf / n * (m_all * ax * ay) as f64 * log_n1(params.n)
        + 3.0 * jf * d
        + params.o_constants.per_n_round * jf / n)
}

/// `max(delta + (j-1) delta', delta', delta'')`.
pub fn delta_max_rounds(params: &ProtocolParams, j: usize) -> f64 {
    (params.delta + (j as f64 - 1.0) * params.delta_prime)
        .max(params.delta_prime)
        .max(params.delta_double_prime)
}

/// Every rate and slack term for one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateBounds {
    /// Rate of the side-information code on the `X x Y` center.
    pub c_sw: f64,
    pub eta1: f64,
    pub r: f64,
    pub c: f64,
    pub delta_triple_prime: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub eta2: f64,
    /// The `j = 1` value of the multi-round slack.
    pub eta3: f64,
}

/// All formulas for a center `t` on `X x Y` and a channel `p(m | x)`.
pub fn rate_bounds(params: &ProtocolParams, center: &Dist, channel: &Channel) -> Result<RateBounds> {
    let (ax, ay) = two_coords(center)?;
    let am = channel.output_arity();
    let SimulationRates { r, c } = simulation_rates(params, center, channel)?;
    let dtp = delta_triple_prime(params, am, ax, ay);
    let delta_min = params.delta.min(dtp).min(params.delta_double_prime);
    let delta_max = params.delta.max(params.delta_prime).max(params.delta_double_prime);
    Ok(RateBounds {
        c_sw: sw_rate(params, center)?,
        eta1: eta1(params, ax, ay)?,
        r,
        c,
        delta_triple_prime: dtp,
        delta_min,
        delta_max,
        eta2: eta2(params, am, ax, ay, delta_max)?,
        eta3: eta3(params, ax, ay, am, am, 1)?,
    })
}

/// `2^{-2 m delta^2 log2(e) + log2(|X||Y|) + 1}`, the estimate's failure bound.
pub fn estimation_failure_bound(m: usize, delta: f64, ax: usize, ay: usize) -> f64 {
    (-2.0 * m as f64 * delta * delta * std::f64::consts::LOG2_E + ((ax * ay) as f64).log2() + 1.0).exp2()
}

/// `2^{-n delta_min^2 + 3}` per simulated round; `None` when `delta_min <= 0`, where
/// the guarantee says nothing.
pub fn simulation_failure_bound(n: usize, delta_min: f64) -> Option<f64> {
    (delta_min > 0.0).then(|| (-(n as f64) * delta_min * delta_min + 3.0).exp2())
}

/// `2^{-n delta'''} + delta''`, the l1 bound between simulated and ideal output laws.
pub fn simulation_l1_bound(n: usize, delta_triple_prime: f64, delta_double_prime: f64) -> f64 {
    (-(n as f64) * delta_triple_prime).exp2() + delta_double_prime
}

/// `delta^2/(2 ln 2) - (2/n)|Y||X| log(n+1) - 2/n` for the channel-generated side information code.
pub fn sw_channel_exponent(params: &ProtocolParams, ax: usize, ay: usize) -> f64 {
    let n = params.n as f64;
    params.delta.powi(2) / (2.0 * std::f64::consts::LN_2) - 2.0 / n * (ax * ay) as f64 * log_n1(params.n) - 2.0 / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::h2;

    fn params(n: usize, d: f64) -> ProtocolParams {
        ProtocolParams { delta: d, delta_prime: d, delta_double_prime: d, ..ProtocolParams::new(n) }
    }

    #[test]
    fn sw_rate_slack_vanishes() {
        let center = Dist::new(vec![2, 2], vec![0.45, 0.05, 0.05, 0.45]).unwrap();
        let h = conditional_entropy(&center, &[0], &[1]).unwrap();
        let c = sw_rate(&params(1_000_000_000, 0.0), &center).unwrap();
        assert!((c - h).abs() < 1e-6);
    }

    #[test]
    fn identity_channel_rates() {
        let center = Dist::new(vec![2, 2], vec![0.25; 4]).unwrap();
        let p = params(1 << 30, 0.0);
        let rates = simulation_rates(&p, &center, &Channel::identity(2).unwrap()).unwrap();
        assert!((rates.c - 1.0).abs() < 1e-6);
        assert!(rates.r.abs() < 1e-6);
    }

    #[test]
    fn bsc_rates_at_small_n() {
        // Frozen from a separate evaluator of the same formulas.
        let center = Dist::new(vec![2, 2], vec![0.25; 4]).unwrap();
        let p = ProtocolParams { delta: 0.1, delta_prime: 0.1, delta_double_prime: 0.1, ..ProtocolParams::new(8) };
        let b = rate_bounds(&p, &center, &Channel::bsc(0.2).unwrap()).unwrap();
        assert!((b.r - (h2(0.2) - 2.0 * (0.1 + h2(0.1)) - 4.0 / 8.0 * 9f64.log2() + log_log_e() / 8.0 - 1.0 / 8.0 - 3.0 / 8.0)).abs() < 1e-12);
        assert!(b.delta_min < 0.0);
        assert_eq!(b.delta_max, 0.1);
    }

    #[test]
    fn estimation_bound_reference_value() {
        let v = estimation_failure_bound(200, 0.1, 2, 2);
        assert!((v - 0.14660).abs() < 1e-4, "{v}");
    }

    #[test]
    fn gamma_domain_is_enforced() {
        let center = Dist::new(vec![2, 2], vec![0.25; 4]).unwrap();
        let p = params(8, 0.6);
        assert!(matches!(
            rate_bounds(&p, &center, &Channel::bsc(0.2).unwrap()),
            Err(Error::DeltaOutOfDomain(_))
        ));
    }
}
