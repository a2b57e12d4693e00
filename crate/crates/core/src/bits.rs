use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One firing assignment: bit `i` is set iff neuron `i` fires.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    len: usize,
    words: Vec<u64>,
}

impl Configuration {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut c = Self::zeros(len);
        c.set_range(0..len, true);
        c
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut c = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            c.set(i, b);
        }
        c
    }

    /// Low `len` bits of `value`, bit 0 first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut c = Self::zeros(len);
        if len > 0 {
            c.words[0] = if len == 64 { value } else { value & ((1u64 << len) - 1) };
        }
        c
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    pub fn set_range(&mut self, range: Range<usize>, value: bool) {
        for i in range {
            self.set(i, value);
        }
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_range(&self, range: Range<usize>) -> usize {
        range.filter(|&i| self.get(i)).count()
    }

    /// Bits `range` as a new configuration.
    pub fn slice(&self, range: Range<usize>) -> Configuration {
        let mut c = Configuration::zeros(range.len());
        for (j, i) in range.enumerate() {
            if self.get(i) {
                c.set(j, true);
            }
        }
        c
    }

    /// Overwrite bits starting at `offset` with `src`.
    pub fn splice(&mut self, offset: usize, src: &Configuration) {
        for j in 0..src.len() {
            self.set(offset + j, src.get(j));
        }
    }

    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn copy_from(&mut self, other: &Configuration) {
        debug_assert_eq!(self.len, other.len);
        self.words.copy_from_slice(&other.words);
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.len == expected {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected, found: self.len })
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({self})")
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Format(format!("bad bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Configuration::from_bools(&bits))
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_across_words() {
        let mut c = Configuration::zeros(130);
        for i in [0, 63, 64, 127, 129] {
            c.set(i, true);
        }
        assert_eq!(c.count_ones(), 5);
        assert!(c.get(64) && !c.get(65));
        assert_eq!(c.count_range(60..70), 2);
        c.set(64, false);
        assert_eq!(c.count_ones(), 4);
    }

    #[test]
    fn string_round_trip() {
        let c: Configuration = "1101_0".parse().unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.to_string(), "11010");
        assert!("10x".parse::<Configuration>().is_err());
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, "\"11010\"");
        assert_eq!(serde_json::from_str::<Configuration>(&json).unwrap(), c);
    }

    #[test]
    fn slice_and_splice() {
        let c = Configuration::from_u64(0b1011_0110, 8);
        let s = c.slice(2..6);
        assert_eq!(c.to_string(), "01101101");
        assert_eq!(s.to_string(), "1011");
        let mut z = Configuration::zeros(8);
        z.splice(2, &s);
        assert_eq!(z.slice(2..6), s);
        assert_eq!(z.count_ones(), 3);
    }
}
