//! Bit-packed binary words with popcount-based weight and distance.

use std::fmt;

use crate::error::{Error, Result};

/// A fixed-length word over GF(2), packed into 64-bit limbs.
///
/// Bit `i` of the word lives in limb `i / 64` at position `i % 64`. Limb bits
/// above `len` are always zero, so equality and hashing can work limb-wise.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitWord {
    len: usize,
    limbs: Vec<u64>,
}

impl BitWord {
    pub fn zeros(len: usize) -> Self {
        BitWord {
            len,
            limbs: vec![0; len.div_ceil(64)],
        }
    }

    /// Builds a word from 0/1 values, position 0 first.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut w = BitWord::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => w.set(i, true),
                other => {
                    return Err(Error::Parameter(format!(
                        "bit value must be 0 or 1, got {other} at position {i}"
                    )))
                }
            }
        }
        Ok(w)
    }

    /// Builds a word of length `len <= 64` whose bit `i` is bit `i` of `value`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut w = BitWord::zeros(len);
        if len > 0 {
            let mask = if len == 64 {
                u64::MAX
            } else {
                (1u64 << len) - 1
            };
            if !w.limbs.is_empty() {
                w.limbs[0] = value & mask;
            }
        }
        w
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range 0..{}", self.len);
        (self.limbs[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range 0..{}", self.len);
        let limb = &mut self.limbs[i / 64];
        if value {
            *limb |= 1u64 << (i % 64);
        } else {
            *limb &= !(1u64 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range 0..{}", self.len);
        self.limbs[i / 64] ^= 1u64 << (i % 64);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.limbs.iter().map(|l| l.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, rhs: &BitWord) {
        assert_eq!(self.len, rhs.len, "xor of words with different lengths");
        for (a, b) in self.limbs.iter_mut().zip(&rhs.limbs) {
            *a ^= b;
        }
    }

    pub fn xor(&self, rhs: &BitWord) -> BitWord {
        let mut out = self.clone();
        out.xor_assign(rhs);
        out
    }

    /// Hamming distance to another word of the same length.
    pub fn distance(&self, rhs: &BitWord) -> usize {
        assert_eq!(
            self.len, rhs.len,
            "distance of words with different lengths"
        );
        self.limbs
            .iter()
            .zip(&rhs.limbs)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Parity of the AND of two words: the GF(2) inner product.
    pub fn dot_parity(&self, rhs: &BitWord) -> bool {
        assert_eq!(self.len, rhs.len, "dot of words with different lengths");
        let ones: u32 = self
            .limbs
            .iter()
            .zip(&rhs.limbs)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    /// The word as an integer; requires `len <= 64`.
    pub fn as_u64(&self) -> u64 {
        assert!(self.len <= 64, "as_u64 requires at most 64 bits");
        self.limbs.first().copied().unwrap_or(0)
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Numeric comparison (most significant limb first). Used to give set-like
    /// operations a deterministic order.
    pub fn cmp_value(&self, rhs: &BitWord) -> std::cmp::Ordering {
        self.len
            .cmp(&rhs.len)
            .then_with(|| self.limbs.iter().rev().cmp(rhs.limbs.iter().rev()))
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter_bits() {
            write!(f, "{}", if bit { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

/// Checked Hamming distance between two words.
pub fn hamming_distance(a: &BitWord, b: &BitWord) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.distance(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weight_and_distance_basics() {
        let a = BitWord::from_bits(&[1, 0, 1, 1, 0, 0, 1]).unwrap();
        let b = BitWord::from_bits(&[0, 0, 1, 0, 0, 1, 1]).unwrap();
        assert_eq!(a.weight(), 4);
        assert_eq!(a.distance(&b), 3);
        assert_eq!(hamming_distance(&a, &b).unwrap(), 3);
        assert_eq!(a.distance(&a), 0);
    }

    #[test]
    fn distance_rejects_length_mismatch() {
        let a = BitWord::zeros(7);
        let b = BitWord::zeros(8);
        assert!(matches!(
            hamming_distance(&a, &b),
            Err(Error::LengthMismatch {
                expected: 7,
                got: 8
            })
        ));
    }

    #[test]
    fn from_bits_rejects_non_binary() {
        assert!(BitWord::from_bits(&[0, 2]).is_err());
    }

    #[test]
    fn set_get_flip_round_trip() {
        let mut w = BitWord::zeros(130);
        w.set(0, true);
        w.set(64, true);
        w.set(129, true);
        assert_eq!(w.weight(), 3);
        assert!(w.get(64));
        w.flip(64);
        assert!(!w.get(64));
        assert_eq!(w.weight(), 2);
    }

    #[test]
    fn display_positions_left_to_right() {
        let w = BitWord::from_bits(&[1, 1, 0, 1]).unwrap();
        assert_eq!(w.to_string(), "1101");
        assert_eq!(w.as_u64(), 0b1011);
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(xs in prop::collection::vec(0u8..2, 1..200),
                                ys in prop::collection::vec(0u8..2, 1..200),
                                zs in prop::collection::vec(0u8..2, 1..200)) {
            let n = xs.len().min(ys.len()).min(zs.len());
            let a = BitWord::from_bits(&xs[..n]).unwrap();
            let b = BitWord::from_bits(&ys[..n]).unwrap();
            let c = BitWord::from_bits(&zs[..n]).unwrap();
            prop_assert_eq!(a.distance(&b), b.distance(&a));
            prop_assert_eq!(a.distance(&b), a.xor(&b).weight());
            prop_assert!(a.distance(&c) <= a.distance(&b) + b.distance(&c));
            prop_assert_eq!(a.distance(&b) == 0, a == b);
        }
    }
}
