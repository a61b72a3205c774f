//! Finite-alphabet information measures, in bits.
//!
//! A [`Dist`] is a dense probability table over a product alphabet. Coordinates
//! are addressed by index; the table is row-major with coordinate 0 most
//! significant. Marginals are computed by summation. `0 log 0` is taken as 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability distribution over `arities[0] x arities[1] x ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dist {
    arities: Vec<usize>,
    probs: Vec<f64>,
}

fn product(arities: &[usize]) -> usize {
    arities.iter().product()
}

fn norm_tolerance(len: usize) -> f64 {
    1e-12 + len as f64 * f64::EPSILON
}

impl Dist {
    pub fn new(arities: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if arities.is_empty() || arities.contains(&0) {
            return Err(Error::InvalidParam(format!("arities must be positive: {arities:?}")));
        }
        let expected = product(&arities);
        if probs.len() != expected {
            return Err(Error::TableSize { expected, got: probs.len() });
        }
        for (idx, &value) in probs.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidProb { idx, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > norm_tolerance(probs.len()) {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Dist { arities, probs })
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(arities: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::NotNormalized { sum });
        }
        Dist::new(arities, weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn uniform(arities: Vec<usize>) -> Result<Self> {
        let len = product(&arities);
        Dist::from_weights(arities, vec![1.0; len.max(1)])
    }

    /// Point mass at the flat index `at`.
    pub fn point(arities: Vec<usize>, at: usize) -> Result<Self> {
        let len = product(&arities);
        if at >= len {
            return Err(Error::SymbolOutOfRange { symbol: at, size: len });
        }
        let mut probs = vec![0.0; len];
        probs[at] = 1.0;
        Dist::new(arities, probs)
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dims(&self) -> usize {
        self.arities.len()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, index: &[usize]) -> f64 {
        self.probs[flat_index(&self.arities, index)]
    }

    /// Marginal on `coords`, with coordinates in the given order.
    pub fn marginal(&self, coords: &[usize]) -> Result<Dist> {
        self.check_coords(coords)?;
        let arities: Vec<usize> = coords.iter().map(|&c| self.arities[c]).collect();
        let mut probs = vec![0.0; product(&arities)];
        let mut digits = vec![0usize; self.dims()];
        for &p in &self.probs {
            if p > 0.0 {
                let mut idx = 0;
                for &c in coords {
                    idx = idx * self.arities[c] + digits[c];
                }
                probs[idx] += p;
            }
            increment(&mut digits, &self.arities);
        }
        Ok(Dist { arities, probs })
    }

    /// Independent product `self x other`; coordinates of `other` follow.
    pub fn product(&self, other: &Dist) -> Dist {
        let mut arities = self.arities.clone();
        arities.extend_from_slice(&other.arities);
        let mut probs = Vec::with_capacity(self.len() * other.len());
        for &a in &self.probs {
            for &b in &other.probs {
                probs.push(a * b);
            }
        }
        Dist { arities, probs }
    }

    fn check_coords(&self, coords: &[usize]) -> Result<()> {
        if coords.is_empty() {
            return Err(Error::EmptyCoords);
        }
        let mut seen = vec![false; self.dims()];
        for &c in coords {
            if c >= self.dims() {
                return Err(Error::CoordOutOfRange { coord: c, dims: self.dims() });
            }
            if seen[c] {
                return Err(Error::OverlappingCoords(c));
            }
            seen[c] = true;
        }
        Ok(())
    }
}

/// Row-major flat index of a digit tuple.
pub fn flat_index(arities: &[usize], digits: &[usize]) -> usize {
    digits.iter().zip(arities).fold(0, |acc, (&d, &a)| acc * a + d)
}

/// Inverse of [`flat_index`].
pub fn unflatten(arities: &[usize], mut index: usize) -> Vec<usize> {
    let mut digits = vec![0; arities.len()];
    for (d, &a) in digits.iter_mut().zip(arities).rev() {
        *d = index % a;
        index /= a;
    }
    digits
}

fn increment(digits: &mut [usize], arities: &[usize]) {
    for (d, &a) in digits.iter_mut().zip(arities).rev() {
        *d += 1;
        if *d < a {
            return;
        }
        *d = 0;
    }
}

fn disjoint(groups: &[&[usize]]) -> Result<Vec<usize>> {
    let mut all: Vec<usize> = Vec::new();
    for g in groups {
        for &c in *g {
            if all.contains(&c) {
                return Err(Error::OverlappingCoords(c));
            }
            all.push(c);
        }
    }
    Ok(all)
}

fn raw_entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

/// Binary entropy `h2(p)`.
pub fn h2(p: f64) -> f64 {
    raw_entropy(&[p, 1.0 - p])
}

/// Shannon entropy of the marginal on `coords`.
pub fn shannon_entropy(d: &Dist, coords: &[usize]) -> Result<f64> {
    Ok(raw_entropy(d.marginal(coords)?.probs()))
}

/// `H(target | given)`; an empty `given` yields `H(target)`.
pub fn conditional_entropy(d: &Dist, target: &[usize], given: &[usize]) -> Result<f64> {
    if target.is_empty() {
        return Err(Error::EmptyCoords);
    }
    let joint = disjoint(&[target, given])?;
    if given.is_empty() {
        return shannon_entropy(d, target);
    }
    Ok(shannon_entropy(d, &joint)? - shannon_entropy(d, given)?)
}

/// `I(a; b) = H(a) - H(a | b)`.
pub fn mutual_information(d: &Dist, a: &[usize], b: &[usize]) -> Result<f64> {
    if b.is_empty() {
        return Err(Error::EmptyCoords);
    }
    Ok(shannon_entropy(d, a)? - conditional_entropy(d, a, b)?)
}

/// `I(a; b | c) = H(a | c) - H(a | b, c)`; an empty `c` yields `I(a; b)`.
pub fn conditional_mutual_information(
    d: &Dist,
    a: &[usize],
    b: &[usize],
    c: &[usize],
) -> Result<f64> {
    if b.is_empty() {
        return Err(Error::EmptyCoords);
    }
    disjoint(&[a, b, c])?;
    let bc: Vec<usize> = b.iter().chain(c).copied().collect();
    Ok(conditional_entropy(d, a, c)? - conditional_entropy(d, a, &bc)?)
}

fn same_alphabet(p: &Dist, q: &Dist) -> Result<()> {
    if p.arities != q.arities {
        return Err(Error::AlphabetMismatch(p.arities.clone(), q.arities.clone()));
    }
    Ok(())
}

/// `D(p || q)` in bits; infinite when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl_divergence(p: &Dist, q: &Dist) -> Result<f64> {
    same_alphabet(p, q)?;
    let mut total = 0.0;
    for (&a, &b) in p.probs.iter().zip(&q.probs) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            total += a * (a / b).log2();
        }
    }
    Ok(total.max(0.0))
}

/// `||p - q||_1`.
pub fn l1_distance(p: &Dist, q: &Dist) -> Result<f64> {
    same_alphabet(p, q)?;
    Ok(p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum())
}

/// Total variation `(1/2) ||p - q||_1`.
pub fn total_variation(p: &Dist, q: &Dist) -> Result<f64> {
    Ok(0.5 * l1_distance(p, q)?)
}

/// Arguments of the continuity function `gamma(d, delta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaArgs {
    pub d: usize,
    pub delta: f64,
}

impl GammaArgs {
    pub fn new(d: usize, delta: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParam("gamma needs d >= 1".into()));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::DeltaOutOfDomain(delta));
        }
        Ok(GammaArgs { d, delta })
    }

    pub fn eval(self) -> f64 {
        self.delta * (self.d as f64).log2() + h2(self.delta)
    }
}

/// `gamma(d, delta) = delta log2(d) + h2(delta)`, the continuity term used in
/// the Fannes (`d = |X||Y| - 1`) and Alicki-Fannes (`d = |X|`) bounds.
pub fn gamma_bound(d: usize, delta: f64) -> Result<f64> {
    Ok(GammaArgs::new(d, delta)?.eval())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern(p: f64) -> Dist {
        Dist::new(vec![2], vec![1.0 - p, p]).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!((shannon_entropy(&bern(0.5), &[0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(shannon_entropy(&bern(0.0), &[0]).unwrap(), 0.0);
        let d = Dist::new(vec![2], vec![0.25, 0.75]).unwrap();
        // -(0.25 log 0.25 + 0.75 log 0.75)
        assert!((shannon_entropy(&d, &[0]).unwrap() - 0.811_278_124_459_132_8).abs() < 1e-12);
    }

    #[test]
    fn empty_coords_rejected() {
        assert!(matches!(shannon_entropy(&bern(0.3), &[]), Err(Error::EmptyCoords)));
    }

    #[test]
    fn overlap_rejected() {
        let d = bern(0.3).product(&bern(0.6));
        assert!(matches!(conditional_entropy(&d, &[0], &[0]), Err(Error::OverlappingCoords(0))));
        assert!(mutual_information(&d, &[0, 1], &[1]).is_err());
        assert!(conditional_mutual_information(&d, &[0], &[1], &[1]).is_err());
    }

    #[test]
    fn conditional_entropy_of_product_and_copy() {
        let d = bern(0.3).product(&bern(0.6));
        let h = conditional_entropy(&d, &[0], &[1]).unwrap();
        assert!((h - h2(0.3)).abs() < 1e-12);
        let copy = Dist::new(vec![2, 2], vec![0.4, 0.0, 0.0, 0.6]).unwrap();
        assert!(conditional_entropy(&copy, &[0], &[1]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bsc_mutual_information() {
        // uniform input through BSC(0.2)
        let d = Dist::new(vec![2, 2], vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let i = mutual_information(&d, &[0], &[1]).unwrap();
        assert!((i - 0.278_071_905_112_638_3).abs() < 1e-12);
        let perfect = Dist::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&perfect, &[0], &[1]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cmi_with_trivial_conditioner() {
        let xy = Dist::new(vec![2, 2], vec![0.3, 0.2, 0.1, 0.4]).unwrap();
        let d = xy.product(&Dist::point(vec![1], 0).unwrap());
        let a = conditional_mutual_information(&d, &[0], &[1], &[2]).unwrap();
        let b = mutual_information(&xy, &[0], &[1]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn markov_chain_has_zero_cmi() {
        // a - c - b with a, b conditionally independent given c
        let pc = [0.3, 0.7];
        let pa_c = [[0.9, 0.1], [0.2, 0.8]];
        let pb_c = [[0.6, 0.4], [0.25, 0.75]];
        let mut w = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    w.push(pc[c] * pa_c[c][a] * pb_c[c][b]);
                }
            }
        }
        let d = Dist::new(vec![2, 2, 2], w).unwrap();
        assert!(conditional_mutual_information(&d, &[0], &[1], &[2]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn kl_and_tv_examples() {
        let p = bern(0.0);
        let q = bern(0.5);
        assert!((kl_divergence(&p, &q).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(kl_divergence(&q, &q).unwrap(), 0.0);
        assert_eq!(kl_divergence(&bern(1.0), &p).unwrap(), f64::INFINITY);
        assert!((total_variation(&p, &q).unwrap() - 0.5).abs() < 1e-15);
        assert!((total_variation(&bern(1.0), &p).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(total_variation(&q, &q).unwrap(), 0.0);
        let r = Dist::uniform(vec![3]).unwrap();
        assert!(matches!(kl_divergence(&p, &r), Err(Error::AlphabetMismatch(..))));
        assert!(total_variation(&p, &r).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_bound(7, 0.0).unwrap(), 0.0);
        assert!((gamma_bound(2, 0.5).unwrap() - 1.5).abs() < 1e-15);
        assert!((gamma_bound(4, 0.25).unwrap() - 1.311_278_124_459_132_8).abs() < 1e-12);
        assert!(matches!(gamma_bound(2, 1.5), Err(Error::DeltaOutOfDomain(_))));
        assert!(gamma_bound(2, -0.1).is_err());
    }

    #[test]
    fn gamma_monotone_on_lower_half() {
        let mut prev = 0.0;
        for k in 0..=500 {
            let g = gamma_bound(3, k as f64 / 1000.0).unwrap();
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn marginal_reorders_coordinates() {
        let d = Dist::new(vec![2, 3], vec![0.1, 0.2, 0.3, 0.05, 0.15, 0.2]).unwrap();
        let m = d.marginal(&[1, 0]).unwrap();
        assert_eq!(m.arities(), &[3, 2]);
        assert!((m.prob(&[2, 1]) - 0.2).abs() < 1e-15);
        assert!((m.prob(&[0, 1]) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(matches!(Dist::new(vec![2], vec![0.5, 0.6]), Err(Error::NotNormalized { .. })));
        assert!(matches!(Dist::new(vec![2], vec![-0.5, 1.5]), Err(Error::InvalidProb { .. })));
        assert!(matches!(Dist::new(vec![3], vec![0.5, 0.5]), Err(Error::TableSize { .. })));
    }
}
