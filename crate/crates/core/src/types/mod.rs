//! Sequences, empirical types and the typical-set machinery built on them.
//!
//! Multi-coordinate objects (joint types, tuples of sequences) use the same
//! row-major convention as [`Dist`]: the cell of a tuple `(a, b, c)` is
//! `(a * |B| + b) * |C| + c`.

mod enumerate;
mod typical;

pub use enumerate::{
    count_types, enumerate_type_class, enumerate_type_class_cells, enumerate_types,
    type_class_size,
};
pub use typical::{
    channel_typical_member_receiver, channel_typical_member_sender, channel_typical_prob,
    cond_typical_set, conditional_type_class, merge_set_check, typical_member,
    ChannelTypicalSpec, TypicalSpec, L1_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{flat_index, unflatten, Dist};

/// Enumeration limits, checked before any exhaustive construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest universe (`|alphabet|^n`, or number of types) we enumerate.
    pub universe: u64,
    /// Largest type class we enumerate.
    pub class: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { universe: 1 << 20, class: 1 << 20 }
    }
}

impl Caps {
    pub(crate) fn check_universe(&self, what: &'static str, size: u128) -> Result<()> {
        if size > self.universe as u128 {
            return Err(Error::CapExceeded { what, size, cap: self.universe });
        }
        Ok(())
    }

    pub(crate) fn check_class(&self, size: u128) -> Result<()> {
        if size > self.class as u128 {
            return Err(Error::CapExceeded { what: "type class", size, cap: self.class });
        }
        Ok(())
    }
}

/// `base^n` as u128, saturating.
pub fn pow_size(base: usize, n: usize) -> u128 {
    (0..n).fold(1u128, |acc, _| acc.saturating_mul(base as u128))
}

/// A finite sequence over the alphabet `0..arity`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Seq {
    arity: usize,
    symbols: Vec<usize>,
}

impl Seq {
    pub fn new(arity: usize, symbols: Vec<usize>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidParam("alphabet size must be >= 1".into()));
        }
        if symbols.is_empty() {
            return Err(Error::InvalidParam("sequence must be non-empty".into()));
        }
        if let Some(&symbol) = symbols.iter().find(|&&s| s >= arity) {
            return Err(Error::SymbolOutOfRange { symbol, size: arity });
        }
        Ok(Seq { arity, symbols })
    }

    pub fn constant(arity: usize, symbol: usize, n: usize) -> Result<Self> {
        Seq::new(arity, vec![symbol; n])
    }

    /// The `index`-th sequence of length `n` in lexicographic order.
    pub fn from_index(arity: usize, n: usize, mut index: u64) -> Self {
        let mut symbols = vec![0; n];
        for s in symbols.iter_mut().rev() {
            *s = (index % arity as u64) as usize;
            index /= arity as u64;
        }
        Seq { arity, symbols }
    }

    /// Lexicographic rank among all sequences of this length.
    pub fn index(&self) -> u64 {
        self.symbols.iter().fold(0u64, |acc, &s| acc * self.arity as u64 + s as u64)
    }

    /// Every sequence of length `n`, in lexicographic order.
    pub fn all(arity: usize, n: usize, caps: &Caps) -> Result<Vec<Seq>> {
        let size = pow_size(arity, n);
        caps.check_universe("sequence universe", size)?;
        Ok((0..size as u64).map(|i| Seq::from_index(arity, n, i)).collect())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbol-wise pairing into the product alphabet (row-major).
    pub fn combine(parts: &[&Seq]) -> Result<Seq> {
        let first = parts.first().ok_or(Error::EmptyCoords)?;
        let n = first.len();
        for p in parts {
            if p.len() != n {
                return Err(Error::LengthMismatch(n, p.len()));
            }
        }
        let arities: Vec<usize> = parts.iter().map(|p| p.arity).collect();
        let arity = arities.iter().product();
        let mut digits = vec![0; parts.len()];
        let symbols = (0..n)
            .map(|i| {
                for (d, p) in digits.iter_mut().zip(parts) {
                    *d = p.symbols[i];
                }
                flat_index(&arities, &digits)
            })
            .collect();
        Ok(Seq { arity, symbols })
    }

    /// Inverse of [`Seq::combine`].
    pub fn split(&self, arities: &[usize]) -> Result<Vec<Seq>> {
        if arities.iter().product::<usize>() != self.arity {
            return Err(Error::Arity(format!(
                "cannot split alphabet {} into {arities:?}",
                self.arity
            )));
        }
        let mut out: Vec<Vec<usize>> = vec![Vec::with_capacity(self.len()); arities.len()];
        for &s in &self.symbols {
            for (o, d) in out.iter_mut().zip(unflatten(arities, s)) {
                o.push(d);
            }
        }
        Ok(out.into_iter().zip(arities).map(|(symbols, &arity)| Seq { arity, symbols }).collect())
    }
}

/// An empirical (joint) type: integer counts over a product alphabet, summing to `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointType {
    n: usize,
    arities: Vec<usize>,
    counts: Vec<u32>,
}

impl JointType {
    pub fn new(arities: Vec<usize>, counts: Vec<u32>) -> Result<Self> {
        if arities.is_empty() || arities.contains(&0) {
            return Err(Error::InvalidParam(format!("arities must be positive: {arities:?}")));
        }
        let expected: usize = arities.iter().product();
        if counts.len() != expected {
            return Err(Error::TableSize { expected, got: counts.len() });
        }
        let n = counts.iter().map(|&c| c as usize).sum();
        if n == 0 {
            return Err(Error::InvalidParam("type must have n >= 1".into()));
        }
        Ok(JointType { n, arities, counts })
    }

    /// The type `t_{x^n}` of one sequence.
    pub fn empirical(s: &Seq) -> JointType {
        let mut counts = vec![0u32; s.arity];
        for &sym in &s.symbols {
            counts[sym] += 1;
        }
        JointType { n: s.len(), arities: vec![s.arity], counts }
    }

    /// The joint type of equal-length sequences.
    pub fn of(seqs: &[&Seq]) -> Result<JointType> {
        let first = seqs.first().ok_or(Error::EmptyCoords)?;
        let n = first.len();
        for s in seqs {
            if s.len() != n {
                return Err(Error::LengthMismatch(n, s.len()));
            }
        }
        let arities: Vec<usize> = seqs.iter().map(|s| s.arity).collect();
        let mut counts = vec![0u32; arities.iter().product()];
        for i in 0..n {
            let cell = seqs.iter().fold(0, |acc, s| acc * s.arity + s.symbols[i]);
            counts[cell] += 1;
        }
        Ok(JointType { n, arities, counts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, index: &[usize]) -> u32 {
        self.counts[flat_index(&self.arities, index)]
    }

    pub fn cells(&self) -> usize {
        self.counts.len()
    }

    pub fn to_dist(&self) -> Dist {
        let n = self.n as f64;
        Dist::new(self.arities.clone(), self.counts.iter().map(|&c| c as f64 / n).collect())
            .expect("type counts form a distribution")
    }

    /// Marginal type on `coords`, in the given order.
    pub fn marginal(&self, coords: &[usize]) -> Result<JointType> {
        if coords.is_empty() {
            return Err(Error::EmptyCoords);
        }
        for &c in coords {
            if c >= self.arities.len() {
                return Err(Error::CoordOutOfRange { coord: c, dims: self.arities.len() });
            }
        }
        let arities: Vec<usize> = coords.iter().map(|&c| self.arities[c]).collect();
        let mut counts = vec![0u32; arities.iter().product()];
        for (cell, &count) in self.counts.iter().enumerate() {
            if count > 0 {
                let digits = unflatten(&self.arities, cell);
                let idx = coords.iter().fold(0, |acc, &c| acc * self.arities[c] + digits[c]);
                counts[idx] += count;
            }
        }
        Ok(JointType { n: self.n, arities, counts })
    }

    /// `||t - center||_1` on probability tables.
    pub fn l1_to(&self, center: &Dist) -> Result<f64> {
        if center.arities() != self.arities.as_slice() {
            return Err(Error::AlphabetMismatch(self.arities.clone(), center.arities().to_vec()));
        }
        let n = self.n as f64;
        Ok(self
            .counts
            .iter()
            .zip(center.probs())
            .map(|(&c, &p)| (c as f64 / n - p).abs())
            .sum())
    }
}

/// Number of fixed-width bits used to send one count of a type with denominator `n`.
pub fn count_width(n: usize) -> u32 {
    ceil_log2(n as u64 + 1)
}

/// `ceil(log2(v))`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(arity: usize, s: &[usize]) -> Seq {
        Seq::new(arity, s.to_vec()).unwrap()
    }

    #[test]
    fn empirical_type_examples() {
        let t = JointType::empirical(&seq(2, &[0, 0, 1, 1]));
        assert_eq!(t.counts(), &[2, 2]);
        assert_eq!(t.n(), 4);
        let j = JointType::of(&[&seq(2, &[0, 1]), &seq(2, &[1, 0])]).unwrap();
        assert_eq!(j.counts(), &[0, 1, 1, 0]);
        let c = JointType::empirical(&seq(3, &[2, 2, 2]));
        assert_eq!(c.counts(), &[0, 0, 3]);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let r = JointType::of(&[&seq(2, &[0, 1]), &seq(2, &[1, 0, 1])]);
        assert!(matches!(r, Err(Error::LengthMismatch(2, 3))));
    }

    #[test]
    fn marginal_matches_single_sequence_type() {
        let x = seq(3, &[0, 2, 1, 2, 2, 0]);
        let y = seq(2, &[1, 0, 0, 1, 1, 1]);
        let j = JointType::of(&[&x, &y]).unwrap();
        assert_eq!(j.marginal(&[0]).unwrap(), JointType::empirical(&x));
        assert_eq!(j.marginal(&[1]).unwrap(), JointType::empirical(&y));
    }

    #[test]
    fn combine_and_split_round_trip() {
        let x = seq(3, &[0, 2, 1]);
        let y = seq(2, &[1, 0, 1]);
        let z = Seq::combine(&[&x, &y]).unwrap();
        assert_eq!(z.arity(), 6);
        assert_eq!(z.symbols(), &[1, 4, 3]);
        assert_eq!(z.split(&[3, 2]).unwrap(), vec![x, y]);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(count_width(8), 4);
        assert_eq!(count_width(6), 3);
    }

    #[test]
    fn rejects_bad_sequences() {
        assert!(matches!(Seq::new(2, vec![0, 2]), Err(Error::SymbolOutOfRange { .. })));
        assert!(Seq::new(2, vec![]).is_err());
    }

    #[test]
    fn index_round_trip() {
        for i in 0..27 {
            assert_eq!(Seq::from_index(3, 3, i).index(), i);
        }
        assert_eq!(Seq::from_index(2, 3, 6).symbols(), &[1, 1, 0]);
    }
}
