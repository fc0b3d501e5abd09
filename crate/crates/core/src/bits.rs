//! Fixed-length bit strings backed by `u64` words.
//!
//! Every mask in the crate (flag outcomes, data errors, round words, Pauli
//! frame halves) is a [`BitString`]. Bit `i` is printed as character `i`, so
//! the textual form of a data mask reads `d1 d2 ... dw` left to right.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

const WORD_BITS: usize = u64::BITS as usize;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; word_count(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut bits = Self {
            len,
            words: vec![u64::MAX; word_count(len)],
        };
        bits.clear_tail();
        bits
    }

    /// Builds a string of `len` bits with the listed positions set.
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = Self::zeros(len);
        for i in indices {
            bits.set(i, true);
        }
        bits
    }

    /// Low `len` bits of `value`, bit 0 first. `len` must be at most 64.
    pub fn from_u64(len: usize, value: u64) -> Self {
        assert!(len <= WORD_BITS, "from_u64 supports at most 64 bits");
        let mut bits = Self::zeros(len);
        if len > 0 {
            bits.words[0] = value;
            bits.clear_tail();
        }
        bits
    }

    /// The first word; only meaningful for strings of at most 64 bits.
    pub fn to_u64(&self) -> u64 {
        debug_assert!(self.len <= WORD_BITS);
        self.words.first().copied().unwrap_or(0)
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
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    #[inline]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitString) {
        assert_eq!(
            self.len, other.len,
            "xor of bit strings with different lengths"
        );
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn or_assign(&mut self, other: &BitString) {
        assert_eq!(
            self.len, other.len,
            "or of bit strings with different lengths"
        );
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn and_assign(&mut self, other: &BitString) {
        assert_eq!(
            self.len, other.len,
            "and of bit strings with different lengths"
        );
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    #[must_use]
    pub fn xor(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    #[must_use]
    pub fn and(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.and_assign(other);
        out
    }

    #[must_use]
    pub fn not(&self) -> BitString {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        out.clear_tail();
        out
    }

    /// Number of positions set in both strings.
    pub fn overlap(&self, other: &BitString) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + bit)
            })
        })
    }

    /// Highest set position, if any.
    pub fn last_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(wi, &w)| wi * WORD_BITS + (WORD_BITS - 1 - w.leading_zeros() as usize))
    }

    /// Copies `count` bits starting at `start` into a new string.
    pub fn slice(&self, start: usize, count: usize) -> BitString {
        assert!(start + count <= self.len);
        BitString::from_indices(count, (0..count).filter(|&i| self.get(start + i)))
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

/// Orders by length, then lexicographically by the printed form (bit 0 first).
impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| {
            for (a, b) in self.words.iter().zip(&other.words) {
                let diff = a ^ b;
                if diff != 0 {
                    let bit = diff.trailing_zeros();
                    return if (a >> bit) & 1 == 0 {
                        Ordering::Less
                    } else {
                        Ordering::Greater
                    };
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("-");
        }
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid bit string character {0:?}")]
pub struct ParseBitsError(pub char);

/// Parses `0`/`1` characters; a lone `-` is the empty string.
impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "-" {
            return Ok(BitString::zeros(0));
        }
        let mut bits = BitString::zeros(s.chars().count());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits.set(i, true),
                other => return Err(ParseBitsError(other)),
            }
        }
        Ok(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ones_clears_tail_bits() {
        let b = BitString::ones(70);
        assert_eq!(b.count_ones(), 70);
        assert_eq!(b.not().count_ones(), 0);
        assert_eq!(b.last_one(), Some(69));
    }

    #[test]
    fn order_matches_printed_form() {
        let a: BitString = "0001".parse().unwrap();
        let b: BitString = "1000".parse().unwrap();
        assert!(a < b);
        assert!(a.to_string() < b.to_string());
    }

    #[test]
    fn empty_string_round_trips() {
        let e = BitString::zeros(0);
        assert_eq!(e.to_string(), "-");
        assert_eq!("-".parse::<BitString>().unwrap(), e);
        assert!("01x".parse::<BitString>().is_err());
    }

    proptest! {
        #[test]
        fn display_parse_and_order_agree(a in proptest::collection::vec(any::<bool>(), 0..150),
                                         b in proptest::collection::vec(any::<bool>(), 0..150)) {
            let pa = BitString::from_indices(a.len(), a.iter().enumerate().filter(|x| *x.1).map(|x| x.0));
            let pb = BitString::from_indices(b.len(), b.iter().enumerate().filter(|x| *x.1).map(|x| x.0));
            prop_assert_eq!(pa.to_string().parse::<BitString>().unwrap(), pa.clone());
            if a.len() == b.len() && !a.is_empty() {
                prop_assert_eq!(pa.cmp(&pb), pa.to_string().cmp(&pb.to_string()));
            }
            prop_assert_eq!(pa.iter_ones().count(), pa.count_ones());
        }
    }
}
