// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

/// A short, fixed-length bit tuple. Index 0 is the most significant bit,
/// so `value()` reads the tuple as an unsigned integer with the first
/// port as MSB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    value: u32,
    len: u8,
}

impl BitVector {
    pub const MAX_LEN: usize = 32;

    pub fn new(value: u32, len: usize) -> Self {
        assert!(len <= Self::MAX_LEN, "bit vector length {len} exceeds {}", Self::MAX_LEN);
        let mask = if len == 32 { u32::MAX } else { (1u32 << len) - 1 };
        BitVector { value: value & mask, len: len as u8 }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let value = bits.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
        Self::new(value, bits.len())
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn get(self, i: usize) -> bool {
        assert!(i < self.len(), "bit index {i} out of range for length {}", self.len);
        (self.value >> (self.len() - 1 - i)) & 1 == 1
    }

    pub fn iter(self) -> impl Iterator<Item = bool> {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn to_bools(self) -> Vec<bool> {
        self.iter().collect()
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitVector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("invalid bit `{other}`")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if bits.len() > Self::MAX_LEN {
            return Err(format!("too many bits ({})", bits.len()));
        }
        Ok(Self::from_bools(&bits))
    }
}
