//! Finite binary sequences: packed storage, seeded generation and the two
//! on-disk formats.
//!
//! Bits are stored least-significant-bit first in `u64` words, so bit `i`
//! lives in `words[i / 64]` at position `i % 64`. Unused high bits of the
//! last word are always zero; equality and hashing rely on that.
//!
//! Packed file layout (little-endian throughout):
//!
//! ```text
//! [ bit length N : u64 LE ][ ceil(N/8) payload bytes, LSB-first, zero pad ]
//! ```

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

const WORD_BITS: usize = 64;

/// Identifies one independent pseudo-random bit stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

impl Seed {
    pub const fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }
}

/// An immutable finite sequence of bits `t(0), …, t(N-1)`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSequence {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

fn alloc_words(n_words: usize) -> Result<Vec<u64>> {
    let mut words = Vec::new();
    words
        .try_reserve_exact(n_words)
        .map_err(|e| Error::Resource(format!("cannot allocate {n_words} words: {e}")))?;
    Ok(words)
}

impl BitSequence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a sequence from raw words. Bits at or beyond `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Result<Self> {
        if words.len() != words_for(len) {
            return Err(Error::pre(format!(
                "{} words cannot hold exactly {len} bits",
                words.len()
            )));
        }
        let tail = len % WORD_BITS;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        Ok(Self { len, words })
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0usize;
        for b in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if b {
                *words.last_mut().unwrap() |= 1u64 << (len % WORD_BITS);
            }
            len += 1;
        }
        Self { len, words }
    }

    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; words_for(len)] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Backing words, LSB-first. The last word is zero-padded.
    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| self.bit_unchecked(i))
    }

    /// Returns `t(i)` as 0 or 1.
    ///
    /// Panics if `i >= len`.
    #[inline]
    pub fn bit(&self, i: usize) -> u8 {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.bit_unchecked(i) as u8
    }

    #[inline]
    pub(crate) fn bit_unchecked(&self, i: usize) -> bool {
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit_unchecked(i))
    }

    /// Number of ones among `t(0..n)`.
    pub fn ones_in_prefix(&self, n: usize) -> Result<u64> {
        if n > self.len {
            return Err(Error::pre(format!("prefix {n} exceeds sequence length {}", self.len)));
        }
        let full = n / WORD_BITS;
        let mut ones: u64 = self.words[..full].iter().map(|w| w.count_ones() as u64).sum();
        let tail = n % WORD_BITS;
        if tail != 0 {
            ones += (self.words[full] & ((1u64 << tail) - 1)).count_ones() as u64;
        }
        Ok(ones)
    }

    /// `|{i < n : t(i) = 0}|`, by population count over whole words.
    pub fn zeros_in_prefix(&self, n: usize) -> Result<u64> {
        Ok(n as u64 - self.ones_in_prefix(n)?)
    }

    pub fn to_text(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    /// Parses the text format: `'0'`/`'1'` with `\n` or `\r` ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        Self::from_text_bytes(text.as_bytes())
    }

    pub fn read_text<R: Read>(mut reader: R) -> Result<Self> {
        let mut buf = Vec::new();
        reader.read_to_end(&mut buf)?;
        Self::from_text_bytes(&buf)
    }

    fn from_text_bytes(bytes: &[u8]) -> Result<Self> {
        let mut bits = Vec::with_capacity(bytes.len());
        for (offset, &c) in bytes.iter().enumerate() {
            match c {
                b'0' => bits.push(false),
                b'1' => bits.push(true),
                b'\n' | b'\r' => {}
                other => {
                    return Err(Error::data_at(
                        offset as u64,
                        format!("unexpected byte {:?} in bit text", other as char),
                    ))
                }
            }
        }
        Ok(Self::from_bits(bits))
    }

    pub fn write_text<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(self.to_text().as_bytes())?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn to_packed_bytes(&self) -> Vec<u8> {
        let payload = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(8 + payload);
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        out.extend(self.words.iter().flat_map(|w| w.to_le_bytes()).take(payload));
        out
    }

    pub fn from_packed_bytes(bytes: &[u8]) -> Result<Self> {
        let header: [u8; 8] = bytes
            .get(..8)
            .and_then(|h| h.try_into().ok())
            .ok_or_else(|| Error::data(format!("truncated header: {} of 8 bytes", bytes.len())))?;
        let declared = u64::from_le_bytes(header);
        let len = usize::try_from(declared)
            .map_err(|_| Error::Resource(format!("bit length {declared} exceeds address space")))?;
        let payload = &bytes[8..];
        let expected = len.div_ceil(8);
        if payload.len() < expected {
            return Err(Error::data_at(
                bytes.len() as u64,
                format!("truncated payload: header declares {len} bits ({expected} bytes), found {}", payload.len()),
            ));
        }
        if payload.len() > expected {
            return Err(Error::data_at(
                (8 + expected) as u64,
                format!("header declares {len} bits but {} payload bytes follow", payload.len()),
            ));
        }
        if len % 8 != 0 {
            let last = payload[expected - 1];
            if last >> (len % 8) != 0 {
                return Err(Error::data_at((8 + expected - 1) as u64, "non-zero pad bits"));
            }
        }
        let mut words = alloc_words(words_for(len))?;
        words.extend(payload.chunks(8).map(|chunk| {
            let mut w = [0u8; 8];
            w[..chunk.len()].copy_from_slice(chunk);
            u64::from_le_bytes(w)
        }));
        Ok(Self { len, words })
    }

    pub fn write_packed<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(&self.to_packed_bytes())?;
        Ok(())
    }

    pub fn read_packed<R: Read>(mut reader: R) -> Result<Self> {
        let mut buf = Vec::new();
        reader.read_to_end(&mut buf)?;
        Self::from_packed_bytes(&buf)
    }
}

impl fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 64;
        let head: String = self.iter().take(SHOWN).map(|b| if b { '1' } else { '0' }).collect();
        let ellipsis = if self.len > SHOWN { "…" } else { "" };
        write!(f, "BitSequence({}: {head}{ellipsis})", self.len)
    }
}

/// Fair-coin bits from stream `seed.stream` of `seed.master`.
///
/// Each SplitMix64 output fills one 64-bit word, bit `64j + b` taken from
/// bit `b` of the `j`-th output.
pub fn generate(seed: Seed, length: usize) -> Result<BitSequence> {
    let n_words = words_for(length);
    let mut words = alloc_words(n_words)?;
    words.extend(SplitMix64::for_stream(seed.master, seed.stream).take(n_words));
    BitSequence::from_words(words, length)
}
