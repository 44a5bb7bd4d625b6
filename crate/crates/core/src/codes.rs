//! Instantaneous codes for positive integers over an MSB-first bit stream.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Code {
    Gamma,
    Delta,
    /// Zeta code with shrinking factor `k >= 1`.
    Zeta(u32),
}

impl Default for Code {
    fn default() -> Self {
        Code::Zeta(3)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Code::Gamma => "gamma".to_owned(),
            Code::Delta => "delta".to_owned(),
            Code::Zeta(k) => format!("zeta{k}"),
        };
        f.pad(&name)
    }
}

impl std::str::FromStr for Code {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(Code::Gamma),
            "delta" => Ok(Code::Delta),
            _ => s
                .strip_prefix("zeta")
                .and_then(|k| k.parse::<u32>().ok())
                .filter(|&k| k >= 1)
                .map(Code::Zeta)
                .ok_or_else(|| Error::Contract(format!("unknown code {s:?}"))),
        }
    }
}

impl Code {
    pub fn validate(self) -> Result<Self> {
        match self {
            Code::Zeta(0) => Err(Error::Contract("zeta parameter must be at least 1".into())),
            c => Ok(c),
        }
    }

    /// Panics if `x == 0`.
    pub fn write(self, w: &mut BitWriter, x: u64) {
        match self {
            Code::Gamma => w.write_gamma(x),
            Code::Delta => w.write_delta(x),
            Code::Zeta(k) => w.write_zeta(x, k),
        }
    }

    pub fn read(self, r: &mut BitReader<'_>) -> u64 {
        match self {
            Code::Gamma => r.read_gamma(),
            Code::Delta => r.read_delta(),
            Code::Zeta(k) => r.read_zeta(k),
        }
    }

    /// Length in bits of the codeword for `x`.
    pub fn len(self, x: u64) -> u64 {
        match self {
            Code::Gamma => gamma_len(x),
            Code::Delta => delta_len(x),
            Code::Zeta(k) => zeta_len(x, k),
        }
    }

    /// Codeword for `x` as a string of `0`/`1` characters.
    pub fn encode(self, x: u64) -> Result<String> {
        if x == 0 {
            return Err(Error::Contract(format!("{self} codes are defined for x >= 1")));
        }
        self.validate()?;
        let mut w = BitWriter::new();
        self.write(&mut w, x);
        Ok(w.to_bit_string())
    }
}

pub fn encode_gamma(x: u64) -> Result<String> {
    Code::Gamma.encode(x)
}

pub fn encode_delta(x: u64) -> Result<String> {
    Code::Delta.encode(x)
}

pub fn encode_zeta(x: u64, k: u32) -> Result<String> {
    Code::Zeta(k).encode(x)
}

#[inline]
fn floor_log2(x: u64) -> u32 {
    63 - x.leading_zeros()
}

#[inline]
pub fn gamma_len(x: u64) -> u64 {
    2 * floor_log2(x) as u64 + 1
}

#[inline]
pub fn delta_len(x: u64) -> u64 {
    let l = floor_log2(x) as u64;
    gamma_len(l + 1) + l
}

/// `(h, lower, upper)` for the zeta interval containing `x`:
/// `2^(hk) <= x < 2^((h+1)k)`.
#[inline]
fn zeta_interval(x: u64, k: u32) -> (u32, u128, u128) {
    let h = floor_log2(x) / k;
    let lower = 1u128 << (h * k);
    let upper = 1u128 << ((h + 1) * k);
    (h, lower, upper)
}

#[inline]
pub fn zeta_len(x: u64, k: u32) -> u64 {
    let (h, lower, upper) = zeta_interval(x, k);
    let range = upper - lower;
    (h as u64 + 1) + minimal_binary_len((x as u128 - lower) as u64, range)
}

/// Bits used by the minimal binary code of `z` in `[0, range)`.
#[inline]
fn minimal_binary_len(z: u64, range: u128) -> u64 {
    if range <= 1 {
        return 0;
    }
    let s = 128 - (range - 1).leading_zeros() as u64;
    let short = (1u128 << s) - range;
    if (z as u128) < short {
        s - 1
    } else {
        s
    }
}

/// Append-only bit buffer, most significant bit of each word first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitWriter {
    words: Vec<u64>,
    len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Writes the low `width` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, width: u32) {
        if width == 0 {
            return;
        }
        debug_assert!(width <= 64);
        let value = if width == 64 {
            value
        } else {
            value & ((1u64 << width) - 1)
        };
        let used = (self.len % 64) as u32;
        if used == 0 {
            self.words.push(0);
        }
        let free = 64 - used;
        let last = self.words.len() - 1;
        if width <= free {
            self.words[last] |= value << (free - width);
        } else {
            let spill = width - free;
            self.words[last] |= value >> spill;
            self.words.push(value << (64 - spill));
        }
        self.len += width as u64;
    }

    pub fn write_zeros(&mut self, mut count: u64) {
        while count > 0 {
            let chunk = count.min(64) as u32;
            self.write_bits(0, chunk);
            count -= chunk as u64;
        }
    }

    pub fn write_unary(&mut self, zeros: u64) {
        self.write_zeros(zeros);
        self.write_bits(1, 1);
    }

    pub fn write_gamma(&mut self, x: u64) {
        assert!(x >= 1, "gamma code is defined for x >= 1");
        let l = floor_log2(x);
        self.write_zeros(l as u64);
        self.write_bits(x, l + 1);
    }

    pub fn write_delta(&mut self, x: u64) {
        assert!(x >= 1, "delta code is defined for x >= 1");
        let l = floor_log2(x);
        self.write_gamma(l as u64 + 1);
        self.write_bits(x, l);
    }

    pub fn write_zeta(&mut self, x: u64, k: u32) {
        assert!(x >= 1, "zeta code is defined for x >= 1");
        assert!(k >= 1, "zeta parameter must be at least 1");
        let (h, lower, upper) = zeta_interval(x, k);
        self.write_unary(h as u64);
        self.write_minimal_binary((x as u128 - lower) as u64, upper - lower);
    }

    fn write_minimal_binary(&mut self, z: u64, range: u128) {
        if range <= 1 {
            return;
        }
        let s = 128 - (range - 1).leading_zeros();
        let short = (1u128 << s) - range;
        if (z as u128) < short {
            self.write_bits(z, s - 1);
        } else {
            self.write_bits((z as u128 + short) as u64, s);
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn into_words(self) -> Vec<u64> {
        self.words
    }

    pub fn to_bit_string(&self) -> String {
        let r = BitReader::new(&self.words, self.len);
        (0..self.len).map(|i| if r.bit_at(i) { '1' } else { '0' }).collect()
    }
}

/// Cursor over an MSB-first bit buffer. Reading past the end yields zeros.
#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    words: &'a [u64],
    len: u64,
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(words: &'a [u64], len: u64) -> Self {
        BitReader { words, len, pos: 0 }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn set_position(&mut self, pos: u64) {
        self.pos = pos;
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn bit_at(&self, i: u64) -> bool {
        let w = self.words.get((i / 64) as usize).copied().unwrap_or(0);
        (w >> (63 - i % 64)) & 1 == 1
    }

    /// Next 64 bits starting at the cursor, left-aligned.
    #[inline]
    fn peek64(&self) -> u64 {
        let idx = (self.pos / 64) as usize;
        let off = (self.pos % 64) as u32;
        let hi = self.words.get(idx).copied().unwrap_or(0);
        if off == 0 {
            hi
        } else {
            let lo = self.words.get(idx + 1).copied().unwrap_or(0);
            (hi << off) | (lo >> (64 - off))
        }
    }

    pub fn read_bits(&mut self, width: u32) -> u64 {
        if width == 0 {
            return 0;
        }
        debug_assert!(width <= 64);
        let v = self.peek64() >> (64 - width);
        self.pos += width as u64;
        v
    }

    pub fn read_unary(&mut self) -> u64 {
        let mut zeros = 0u64;
        loop {
            let w = self.peek64();
            if w != 0 {
                let lz = w.leading_zeros() as u64;
                self.pos += lz + 1;
                return zeros + lz;
            }
            if self.pos >= self.len {
                // Malformed input: no terminating one before the end.
                return zeros;
            }
            zeros += 64;
            self.pos += 64;
        }
    }

    pub fn read_gamma(&mut self) -> u64 {
        let l = self.read_unary() as u32;
        // The stop bit is the leading one of the binary representation.
        (1u64 << l) | self.read_bits(l)
    }

    pub fn read_delta(&mut self) -> u64 {
        let l = (self.read_gamma() - 1) as u32;
        (1u64 << l) | self.read_bits(l)
    }

    pub fn read_zeta(&mut self, k: u32) -> u64 {
        let h = self.read_unary() as u32;
        let lower = 1u128 << (h * k);
        let range = (1u128 << ((h + 1) * k)) - lower;
        (lower + self.read_minimal_binary(range) as u128) as u64
    }

    fn read_minimal_binary(&mut self, range: u128) -> u64 {
        if range <= 1 {
            return 0;
        }
        let s = 128 - (range - 1).leading_zeros();
        let short = ((1u128 << s) - range) as u64;
        let head = self.read_bits(s - 1);
        if head < short {
            head
        } else {
            ((head << 1) | self.read_bits(1)) - short
        }
    }
}
