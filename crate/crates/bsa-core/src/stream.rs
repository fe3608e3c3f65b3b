//! Packed unary bit streams and their exact rational values.
//!
//! A stream of length n carries one of n+1 values: k/n, where k is the number
//! of 1 bits. The value ignores bit order entirely; the deterministic units in
//! this crate rely on that, so `permute` exists mainly to let tests scramble
//! inputs and check that outputs do not care.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact value of a unary stream: `ones` 1-bits out of `len` slots.
///
/// Kept unreduced: 2/4 and 1/2 are the same rational but different resolutions,
/// and resolution is load-bearing everywhere here. `PartialEq` compares the
/// literal pair; use [`StreamValue::eq_rational`] to compare across lengths.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct StreamValue {
    ones: u64,
    len: u64,
}

impl StreamValue {
    pub fn new(ones: u64, len: u64) -> Result<Self> {
        if len == 0 || ones > len {
            return Err(Error::InvalidValue { ones, len });
        }
        Ok(Self { ones, len })
    }

    pub fn zero(len: u64) -> Self {
        assert!(len >= 1);
        Self { ones: 0, len }
    }

    pub fn ones(&self) -> u64 {
        self.ones
    }

    /// The stream length n (the value's denominator), never zero, so there is
    /// no `is_empty` counterpart.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn as_f64(&self) -> f64 {
        self.ones as f64 / self.len as f64
    }

    /// Cross-resolution equality: k1/n1 == k2/n2 as rationals.
    pub fn eq_rational(&self, other: &StreamValue) -> bool {
        (self.ones as u128) * (other.len as u128) == (other.ones as u128) * (self.len as u128)
    }

    /// Exact value of a scaled (averaging) add: (k1+k2)/(2n). Both operands
    /// must share a resolution.
    pub fn scaled_add(self, other: StreamValue) -> Result<StreamValue> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len as usize,
                right: other.len as usize,
            });
        }
        StreamValue::new(self.ones + other.ones, 2 * self.len)
    }

    /// Exact product value: k1*k2 / (n1*n2).
    pub fn product(self, other: StreamValue) -> StreamValue {
        StreamValue {
            ones: self.ones * other.ones,
            len: self.len * other.len,
        }
    }

    /// Exact rational check: |self - other| <= num/den, no floats involved.
    pub fn diff_within(self, other: StreamValue, num: u64, den: u64) -> bool {
        assert!(den > 0);
        let lhs = (self.ones as u128) * (other.len as u128);
        let rhs = (other.ones as u128) * (self.len as u128);
        let diff = lhs.abs_diff(rhs) * den as u128;
        diff <= (num as u128) * (self.len as u128) * (other.len as u128)
    }
}

impl fmt::Display for StreamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.ones, self.len)
    }
}

impl FromStr for StreamValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (k, n) = s
            .split_once('/')
            .ok_or_else(|| Error::Parse(format!("expected k/n, got {s:?}")))?;
        let ones = k
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad numerator in {s:?}: {e}")))?;
        let len = n
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad denominator in {s:?}: {e}")))?;
        StreamValue::new(ones, len)
    }
}

impl Serialize for StreamValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StreamValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

const WORD_BITS: usize = 64;

/// Bit stream packed LSB-first into 64-bit words. Slot 0 is the leftmost bit
/// of the textual form and the first bit on the wire.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitStream {
    words: Vec<u64>,
    len: usize,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

impl BitStream {
    /// All-zero stream. Streams are never empty: a stream must encode a value.
    pub fn zeros(len: usize) -> Self {
        assert!(len >= 1, "stream length must be >= 1");
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn all_ones(len: usize) -> Self {
        assert!(len >= 1, "stream length must be >= 1");
        let mut s = Self {
            words: vec![u64::MAX; words_for(len)],
            len,
        };
        s.mask_top();
        s
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut s = Self::zeros(len);
        for i in 0..len {
            if f(i) {
                s.set_bit(i, true);
            }
        }
        s
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_fn(bits.len(), |i| bits[i])
    }

    fn mask_top(&mut self) {
        let r = self.len % WORD_BITS;
        if r != 0 {
            *self.words.last_mut().unwrap() &= (1u64 << r) - 1;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set_bit(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if v {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn value(&self) -> StreamValue {
        StreamValue {
            ones: self.count_ones(),
            len: self.len as u64,
        }
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & b)
            .collect();
        Ok(Self {
            words,
            len: self.len,
        })
    }

    pub fn or(&self, other: &Self) -> Result<Self> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        Ok(Self {
            words,
            len: self.len,
        })
    }

    /// Up to 64 bits starting at `pos`, packed LSB-first (slot `pos` in bit 0).
    #[inline]
    pub fn extract_word(&self, pos: usize, nbits: usize) -> u64 {
        debug_assert!(nbits <= WORD_BITS);
        debug_assert!(pos + nbits <= self.len);
        if nbits == 0 {
            return 0;
        }
        let w = pos / WORD_BITS;
        let off = pos % WORD_BITS;
        let mut x = self.words[w] >> off;
        if off != 0 && w + 1 < self.words.len() {
            x |= self.words[w + 1] << (WORD_BITS - off);
        }
        if nbits < WORD_BITS {
            x &= (1u64 << nbits) - 1;
        }
        x
    }

    /// Overwrites `nbits` slots starting at `pos` with the low bits of `v`.
    #[inline]
    pub fn write_word(&mut self, pos: usize, nbits: usize, v: u64) {
        debug_assert!(nbits <= WORD_BITS);
        debug_assert!(pos + nbits <= self.len);
        if nbits == 0 {
            return;
        }
        let v = if nbits < WORD_BITS {
            v & ((1u64 << nbits) - 1)
        } else {
            v
        };
        let w = pos / WORD_BITS;
        let off = pos % WORD_BITS;
        let low_bits = (WORD_BITS - off).min(nbits);
        let low_mask = if low_bits == WORD_BITS {
            u64::MAX
        } else {
            ((1u64 << low_bits) - 1) << off
        };
        self.words[w] = (self.words[w] & !low_mask) | ((v << off) & low_mask);
        if low_bits < nbits {
            let hi_bits = nbits - low_bits;
            let hi_mask = (1u64 << hi_bits) - 1;
            self.words[w + 1] = (self.words[w + 1] & !hi_mask) | ((v >> low_bits) & hi_mask);
        }
    }

    /// ORs the low bits of `v` into `nbits` slots starting at `pos`.
    #[inline]
    pub fn or_word(&mut self, pos: usize, nbits: usize, v: u64) {
        let cur = self.extract_word(pos, nbits);
        self.write_word(pos, nbits, cur | v);
    }

    /// Copies `nbits` slots from `src` starting at `src_pos` into `self` at
    /// `dst_pos`, a word-sized chunk at a time.
    pub fn copy_range(&mut self, dst_pos: usize, src: &Self, src_pos: usize, nbits: usize) {
        assert!(src_pos + nbits <= src.len && dst_pos + nbits <= self.len);
        let mut done = 0;
        while done < nbits {
            let chunk = (nbits - done).min(WORD_BITS);
            let v = src.extract_word(src_pos + done, chunk);
            self.write_word(dst_pos + done, chunk, v);
            done += chunk;
        }
    }

    pub fn fill_range(&mut self, pos: usize, nbits: usize, bit: bool) {
        assert!(pos + nbits <= self.len);
        let v = if bit { u64::MAX } else { 0 };
        let mut done = 0;
        while done < nbits {
            let chunk = (nbits - done).min(WORD_BITS);
            self.write_word(pos + done, chunk, v);
            done += chunk;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    /// Reorders bits: slot i of the result is slot `perm[i]` of `self`.
    /// `perm` must be a bijection on 0..len.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len {
            return Err(Error::InvalidPermutation(format!(
                "permutation length {} does not match stream length {}",
                perm.len(),
                self.len
            )));
        }
        let mut seen = vec![false; self.len];
        for &p in perm {
            if p >= self.len {
                return Err(Error::InvalidPermutation(format!(
                    "index {p} out of range for length {}",
                    self.len
                )));
            }
            if seen[p] {
                return Err(Error::InvalidPermutation(format!("index {p} repeated")));
            }
            seen[p] = true;
        }
        Ok(Self::from_fn(self.len, |i| self.bit(perm[i])))
    }
}

impl fmt::Display for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitStream({self})")
        } else {
            write!(f, "BitStream(len={}, ones={})", self.len, self.count_ones())
        }
    }
}

impl FromStr for BitStream {
    type Err = Error;

    /// Parses the textual form: a comma-free binary string, leftmost bit first.
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Parse("stream literal must be nonempty".into()));
        }
        let mut out = BitStream::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => out.set_bit(i, true),
                other => {
                    return Err(Error::Parse(format!(
                        "invalid character {other:?} at position {i} in stream literal"
                    )))
                }
            }
        }
        Ok(out)
    }
}

/// The canonical stream for a value: all 1s first, then 0s. Any unit that is
/// order-invariant may regenerate its operands in this form.
pub fn canonical_stream(v: StreamValue) -> BitStream {
    let mut s = BitStream::zeros(v.len() as usize);
    s.fill_range(0, v.ones() as usize, true);
    s
}

/// Concatenates equal-length batches into one stream for successive
/// processing. The combined value is the mean of the batch values.
pub fn concat_runs(streams: &[BitStream]) -> Result<BitStream> {
    if streams.is_empty() {
        return Err(Error::EmptyInput("concat_runs needs at least one stream"));
    }
    let n = streams[0].len();
    for s in streams {
        if s.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: s.len(),
            });
        }
    }
    let mut out = BitStream::zeros(n * streams.len());
    for (i, s) in streams.iter().enumerate() {
        out.copy_range(i * n, s, 0, n);
    }
    Ok(out)
}
