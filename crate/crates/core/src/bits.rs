//! Bit strings with exact lengths, MSB-first within each byte.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    /// Takes the first `len` bits of `bytes`; the rest of the last byte must be zero padding.
    pub fn from_bytes(bytes: Vec<u8>, len: usize) -> Result<Self> {
        if len.div_ceil(8) != bytes.len() {
            return Err(Error::Container(format!(
                "{} bytes cannot hold exactly {len} bits",
                bytes.len()
            )));
        }
        if !len.is_multiple_of(8) && bytes[len / 8] << (len % 8) != 0 {
            return Err(Error::Container("non-zero padding bits".into()));
        }
        Ok(BitString { bytes, len })
    }

    /// Parses a string of '0' and '1'.
    pub fn from_bit_str(s: &str) -> Option<Self> {
        let mut b = BitString::new();
        for c in s.chars() {
            match c {
                '0' => b.push(false),
                '1' => b.push(true),
                _ => return None,
            }
        }
        Some(b)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[self.len / 8] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Appends the low `n` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, n: u32) {
        for i in (0..n).rev() {
            self.push(value >> i & 1 == 1);
        }
    }

    pub fn extend(&mut self, other: &BitString) {
        for i in 0..other.len {
            self.push(other.get(i));
        }
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index out of range");
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: self, pos: 0 }
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub struct BitReader<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl BitReader<'_> {
    pub fn read(&mut self) -> Result<bool> {
        if self.pos >= self.bits.len {
            return Err(Error::Underrun);
        }
        self.pos += 1;
        Ok(self.bits.get(self.pos - 1))
    }

    pub fn read_bits(&mut self, n: u32) -> Result<u64> {
        let mut v = 0;
        for _ in 0..n {
            v = v << 1 | u64::from(self.read()?);
        }
        Ok(v)
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len - self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_layout() {
        let b = BitString::from_bit_str("1010000011").unwrap();
        assert_eq!(b.len(), 10);
        assert_eq!(b.as_bytes(), &[0b1010_0000, 0b1100_0000]);
        assert_eq!(b.to_string(), "1010000011");
        let back = BitString::from_bytes(b.as_bytes().to_vec(), 10).unwrap();
        assert_eq!(back, b);
        assert!(BitString::from_bytes(vec![0xff], 4).is_err());
        assert!(BitString::from_bytes(vec![0xf0, 0], 4).is_err());
    }

    #[test]
    fn reader_underrun() {
        let mut b = BitString::new();
        b.push_bits(0b101, 3);
        let mut r = b.reader();
        assert_eq!(r.read_bits(3).unwrap(), 5);
        assert!(matches!(r.read(), Err(Error::Underrun)));
    }
}
