//! Packed bit vectors.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Fixed-length bit vector packed into 64-bit words, least significant bit
/// first within each word. Bits past `len` are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self { words: vec![u64::MAX; len.div_ceil(64)], len };
        v.clear_tail();
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a string of `'0'`/`'1'` characters.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Contract(format!("invalid bit character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bools(&bits))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `wt(self & other)`.
    pub fn and_weight(&self, other: &Self) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// Hamming distance.
    pub fn distance(&self, other: &Self) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Copies bits `[start, start + len)` into a new vector.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = Self::zeros(len);
        if start % 64 == 0 {
            let w0 = start / 64;
            let nw = out.words.len();
            out.words.copy_from_slice(&self.words[w0..w0 + nw]);
        } else {
            let shift = start % 64;
            for (k, w) in out.words.iter_mut().enumerate() {
                let idx = start / 64 + k;
                let lo = self.words[idx] >> shift;
                let hi = self.words.get(idx + 1).map_or(0, |x| x << (64 - shift));
                *w = lo | hi;
            }
        }
        out.clear_tail();
        out
    }

    /// Appends all bits of `other`.
    pub fn extend(&mut self, other: &Self) {
        if self.len % 64 == 0 {
            self.words.extend_from_slice(&other.words);
            self.len += other.len;
            return;
        }
        let start = self.len;
        self.len += other.len;
        self.words.resize(self.len.div_ceil(64), 0);
        for i in 0..other.len {
            if other.get(i) {
                self.set(start + i, true);
            }
        }
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a BitVec>) -> Self {
        let mut out = Self::zeros(0);
        for p in parts {
            out.extend(p);
        }
        out
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * 64 + t)
                }
            })
        })
    }

    /// Hex encoding, bit 0 as the most significant bit of the first byte.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.len.div_ceil(8)];
        for i in self.iter_ones() {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
        hex::encode(bytes)
    }

    /// Inverse of [`BitVec::to_hex`]; `len` must fit the digits supplied and
    /// padding bits must be zero.
    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        let bytes = hex::decode(s.trim()).map_err(|e| Error::Contract(format!("bad hex: {e}")))?;
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Contract(format!(
                "hex string holds {} bytes, expected {} for {len} bits",
                bytes.len(),
                len.div_ceil(8)
            )));
        }
        let mut v = Self::zeros(len);
        for (j, &byte) in bytes.iter().enumerate() {
            for b in 0..8 {
                if byte & (0x80 >> b) != 0 {
                    let i = j * 8 + b;
                    if i >= len {
                        return Err(Error::Contract("nonzero padding bits in hex string".into()));
                    }
                    v.set(i, true);
                }
            }
        }
        Ok(v)
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

impl std::fmt::Display for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}
