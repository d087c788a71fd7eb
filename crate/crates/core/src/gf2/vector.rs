use std::fmt;
use std::str::FromStr;

use super::{word_count, Gf2Error, WORD_BITS};

/// A fixed-length vector over GF(2), packed 64 elements per word.
///
/// Element 0 lives in the least significant bit of the first word. Bits past
/// `len` in the last word are always zero, so word-wise equality, hashing and
/// popcounts need no masking.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; word_count(len)],
        }
    }

    /// Unit vector with a single 1 at `index`.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    pub fn ones(len: usize) -> Self {
        Self::from_fn(len, |_| true)
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            if f(i) {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_fn(bits.len(), |i| bits[i])
    }

    /// Builds a vector from 0/1 integers; any nonzero value counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        Self::from_fn(bits.len(), |i| bits[i] != 0)
    }

    /// Wraps raw words. Padding bits above `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Result<Self, Gf2Error> {
        if words.len() != word_count(len) {
            return Err(Gf2Error::WordCount {
                len,
                expected: word_count(len),
                got: words.len(),
            });
        }
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Ok(Self { len, words })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(
            index < self.len,
            "bit index {index} out of range for length {}",
            self.len
        );
        (self.words[index / WORD_BITS] >> (index % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, index: usize, value: bool) {
        assert!(
            index < self.len,
            "bit index {index} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (index % WORD_BITS);
        if value {
            self.words[index / WORD_BITS] |= mask;
        } else {
            self.words[index / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, index: usize) {
        assert!(
            index < self.len,
            "bit index {index} out of range for length {}",
            self.len
        );
        self.words[index / WORD_BITS] ^= 1u64 << (index % WORD_BITS);
    }

    /// Shifts every element one index up (element `i` moves to `i + 1`),
    /// writes `fill` into index 0 and returns the element pushed out of the
    /// top. A zero-length vector returns `fill`.
    pub fn shift_up(&mut self, fill: bool) -> bool {
        if self.len == 0 {
            return fill;
        }
        let out = self.get(self.len - 1);
        let mut carry = u64::from(fill);
        for w in &mut self.words {
            let next = *w >> (WORD_BITS - 1);
            *w = (*w << 1) | carry;
            carry = next;
        }
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.len);
        }
        out
    }

    /// Shifts every element one index down (element `i` moves to `i - 1`),
    /// writes `fill` into the top index and returns the old element 0.
    pub fn shift_down(&mut self, fill: bool) -> bool {
        if self.len == 0 {
            return fill;
        }
        let out = self.words[0] & 1 == 1;
        let n = self.words.len();
        for i in 0..n {
            let hi = if i + 1 < n {
                self.words[i + 1] << (WORD_BITS - 1)
            } else {
                0
            };
            self.words[i] = (self.words[i] >> 1) | hi;
        }
        let top = self.len - 1;
        self.set(top, fill);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// In-place addition (XOR). Panics on length mismatch.
    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        xor_words(&mut self.words, &other.words);
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector, Gf2Error> {
        if self.len != other.len {
            return Err(Gf2Error::LengthMismatch {
                op: "xor",
                left: self.len,
                right: other.len,
            });
        }
        let mut out = self.clone();
        xor_words(&mut out.words, &other.words);
        Ok(out)
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> Result<bool, Gf2Error> {
        if self.len != other.len {
            return Err(Gf2Error::LengthMismatch {
                op: "dot",
                left: self.len,
                right: other.len,
            });
        }
        Ok(dot_words(&self.words, &other.words))
    }

    /// Iterates the elements in index order.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of the set elements, ascending.
    pub fn ones_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(wi, &w)| SetBits(w).map(move |b| wi * WORD_BITS + b))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }
}

impl fmt::Display for BitVector {
    /// Renders as a string of `0`/`1`, element 0 first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Gf2Error;

    /// Parses a string of `0`/`1` characters. `_` and whitespace are ignored
    /// so long vectors can be grouped.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for (pos, ch) in s.chars().enumerate() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                '_' => {}
                c if c.is_whitespace() => {}
                other => return Err(Gf2Error::ParseBit { pos, found: other }),
            }
        }
        Ok(Self::from_bools(&bits))
    }
}

#[inline]
pub(crate) fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

#[inline]
pub(crate) fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

#[inline]
pub(crate) fn dot_words(a: &[u64], b: &[u64]) -> bool {
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc ^= x & y;
    }
    acc.count_ones() & 1 == 1
}

/// Iterator over set bit positions of a single word.
pub(crate) struct SetBits(pub(crate) u64);

impl Iterator for SetBits {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(tz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padding_stays_clear() {
        let v = BitVector::ones(70);
        assert_eq!(v.words()[1], (1 << 6) - 1);
        assert_eq!(v.count_ones(), 70);
        let w = BitVector::from_words(3, vec![u64::MAX]).unwrap();
        assert_eq!(w, BitVector::ones(3));
    }

    #[test]
    fn parse_and_display() {
        let v: BitVector = "1011_0".parse().unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!(v.to_bits(), vec![1, 0, 1, 1, 0]);
        assert_eq!(v.to_string(), "10110");
        assert!(matches!(
            "10x".parse::<BitVector>(),
            Err(Gf2Error::ParseBit { pos: 2, found: 'x' })
        ));
    }

    #[test]
    fn dot_and_xor() {
        let a = BitVector::from_bits(&[1, 1, 0, 1]);
        let b = BitVector::from_bits(&[1, 0, 1, 1]);
        assert!(!a.dot(&b).unwrap());
        assert_eq!(a.xor(&b).unwrap(), BitVector::from_bits(&[0, 1, 1, 0]));
        assert!(a.dot(&BitVector::zeros(3)).is_err());
    }

    #[test]
    fn shifts_cross_word_boundary() {
        let mut v = BitVector::from_fn(65, |i| i == 63 || i == 64);
        assert!(v.shift_up(true));
        assert_eq!(v.ones_indices().collect::<Vec<_>>(), vec![0, 64]);
        assert!(v.shift_down(false));
        assert_eq!(v.ones_indices().collect::<Vec<_>>(), vec![63]);
        let mut w = BitVector::from_bits(&[1, 0, 1]);
        assert!(w.shift_down(true));
        assert_eq!(w.to_bits(), vec![0, 1, 1]);
    }

    #[test]
    fn ones_indices_cross_word_boundary() {
        let v = BitVector::from_fn(130, |i| i % 63 == 0);
        assert_eq!(v.ones_indices().collect::<Vec<_>>(), vec![0, 63, 126]);
    }
}
