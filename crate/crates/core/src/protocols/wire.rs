//! Bit-exact message encoding.

use crate::types::{ceil_log2, count_width, JointType, Seq};

/// A message under construction, one `bool` per transmitted bit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Bits(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn push_bits(&mut self, bits: &[bool]) {
        self.0.extend_from_slice(bits);
    }

    /// `value` in `width` bits, most significant first.
    pub fn push_uint(&mut self, value: u64, width: u32) {
        assert!(width == 64 || value >> width == 0, "{value} does not fit in {width} bits");
        for i in (0..width).rev() {
            self.0.push((value >> i) & 1 == 1);
        }
    }

    /// Each symbol in `ceil(log2 arity)` bits.
    pub fn push_seq(&mut self, seq: &Seq) {
        let w = ceil_log2(seq.arity() as u64);
        for &s in seq.symbols() {
            self.push_uint(s as u64, w);
        }
    }

    /// Each cell count in `ceil(log2(n + 1))` bits.
    pub fn push_type(&mut self, t: &JointType) {
        let w = count_width(t.n());
        for &c in t.counts() {
            self.push_uint(c as u64, w);
        }
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: &self.0, pos: 0 }
    }
}

/// Sequential reader over a received message. Reading past the end is a protocol bug.
#[derive(Debug)]
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl BitReader<'_> {
    pub fn read_bits(&mut self, k: usize) -> Vec<bool> {
        assert!(self.pos + k <= self.bits.len(), "message too short");
        let out = self.bits[self.pos..self.pos + k].to_vec();
        self.pos += k;
        out
    }

    pub fn read_uint(&mut self, width: u32) -> u64 {
        self.read_bits(width as usize).iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn read_seq(&mut self, arity: usize, n: usize) -> Seq {
        let w = ceil_log2(arity as u64);
        let symbols = (0..n).map(|_| self.read_uint(w) as usize).collect();
        Seq::new(arity, symbols).expect("decoded symbol out of range")
    }

    pub fn read_type(&mut self, n: usize, arities: &[usize]) -> JointType {
        let w = count_width(n);
        let cells: usize = arities.iter().product();
        let counts = (0..cells).map(|_| self.read_uint(w) as u32).collect();
        let t = JointType::new(arities.to_vec(), counts).expect("decoded type is empty");
        assert_eq!(t.n(), n, "decoded counts do not sum to n");
        t
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = Seq::new(3, vec![2, 0, 1, 1]).unwrap();
        let t = JointType::empirical(&s);
        let mut b = Bits::new();
        b.push_uint(5, 3);
        b.push_seq(&s);
        b.push_type(&t);
        assert_eq!(b.len(), 3 + 8 + 9);
        let mut r = b.reader();
        assert_eq!(r.read_uint(3), 5);
        assert_eq!(r.read_seq(3, 4), s);
        assert_eq!(r.read_type(4, &[3]), t);
        assert_eq!(r.remaining(), 0);
    }

    #[test]
    fn unary_alphabet_costs_nothing() {
        let mut b = Bits::new();
        b.push_seq(&Seq::constant(1, 0, 10).unwrap());
        assert!(b.is_empty());
    }
}
