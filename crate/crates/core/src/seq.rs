//! DNA alphabet, 2-bit packed k-mers and read records.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported k. A k-mer of this length fits in a `u128` at 2 bits per base.
pub const MAX_K: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    A = 0,
    C = 1,
    G = 2,
    T = 3,
}

impl Base {
    pub const ALL: [Base; 4] = [Base::A, Base::C, Base::G, Base::T];

    pub fn from_ascii(c: u8) -> Option<Base> {
        match c {
            b'A' | b'a' => Some(Base::A),
            b'C' | b'c' => Some(Base::C),
            b'G' | b'g' => Some(Base::G),
            b'T' | b't' => Some(Base::T),
            _ => None,
        }
    }

    #[inline]
    pub fn from_code(code: u8) -> Base {
        Self::ALL[(code & 3) as usize]
    }

    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    #[inline]
    pub fn complement(self) -> Base {
        Base::from_code(3 - self.code())
    }

    pub fn to_ascii(self) -> u8 {
        b"ACGT"[self as usize]
    }
}

/// 2-bit code of an ASCII base, or `None` for anything outside ACGT.
#[inline]
pub(crate) fn code_of(c: u8) -> Option<u8> {
    match c {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

/// A DNA word of up to [`MAX_K`] bases, packed most-significant-first.
///
/// Ordering compares the packed value first, which for equal lengths is the
/// lexicographic order with A < C < G < T.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Kmer {
    bits: u128,
    len: u8,
}

#[inline]
fn mask(len: usize) -> u128 {
    if len == 64 {
        u128::MAX
    } else {
        (1u128 << (2 * len)) - 1
    }
}

impl Kmer {
    /// Builds a k-mer from raw packed bits. Bits above `2 * len` are cleared.
    pub fn from_bits(bits: u128, len: usize) -> Kmer {
        debug_assert!((1..=MAX_K).contains(&len));
        Kmer {
            bits: bits & mask(len),
            len: len as u8,
        }
    }

    pub fn from_bytes(s: &[u8]) -> Result<Kmer> {
        if s.is_empty() || s.len() > MAX_K {
            return Err(Error::InvalidLength {
                expected: MAX_K,
                found: s.len(),
            });
        }
        let mut bits = 0u128;
        for &c in s {
            let code = code_of(c.to_ascii_uppercase()).ok_or(Error::NonAcgt(c as char))?;
            bits = (bits << 2) | code as u128;
        }
        Ok(Kmer {
            bits,
            len: s.len() as u8,
        })
    }

    #[inline]
    pub fn bits(&self) -> u128 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Base at position `i` (0 = leftmost).
    pub fn base(&self, i: usize) -> Base {
        let shift = 2 * (self.len() - 1 - i);
        Base::from_code((self.bits >> shift) as u8)
    }

    pub fn reverse_complement(&self) -> Kmer {
        let len = self.len();
        let x = !self.bits & mask(len);
        let r = x.reverse_bits();
        // reverse_bits also flips the two bits inside each base; swap them back
        let lo = 0x5555_5555_5555_5555_5555_5555_5555_5555u128;
        let r = ((r >> 1) & lo) | ((r & lo) << 1);
        Kmer {
            bits: r >> (128 - 2 * len),
            len: self.len,
        }
    }

    pub fn canonical(&self) -> Kmer {
        let rc = self.reverse_complement();
        if rc.bits < self.bits {
            rc
        } else {
            *self
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.bits <= self.reverse_complement().bits
    }

    pub fn is_palindrome(&self) -> bool {
        self.bits == self.reverse_complement().bits
    }

    /// Drops the first base and appends `b`.
    #[inline]
    pub fn push_back(&self, b: Base) -> Kmer {
        Kmer {
            bits: ((self.bits << 2) | b.code() as u128) & mask(self.len()),
            len: self.len,
        }
    }

    /// Drops the last base and prepends `b`.
    #[inline]
    pub fn push_front(&self, b: Base) -> Kmer {
        Kmer {
            bits: (self.bits >> 2) | ((b.code() as u128) << (2 * (self.len() - 1))),
            len: self.len,
        }
    }

    /// First `len - 1` bases.
    pub fn prefix(&self) -> Kmer {
        Kmer {
            bits: self.bits >> 2,
            len: self.len - 1,
        }
    }

    /// Last `len - 1` bases.
    pub fn suffix(&self) -> Kmer {
        Kmer {
            bits: self.bits & mask(self.len() - 1),
            len: self.len - 1,
        }
    }

    /// Appends a base, growing the word by one.
    pub fn extend(&self, b: Base) -> Kmer {
        debug_assert!(self.len() < MAX_K);
        Kmer {
            bits: (self.bits << 2) | b.code() as u128,
            len: self.len + 1,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.base(i).to_ascii()).collect()
    }
}

impl fmt::Display for Kmer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(std::str::from_utf8(&self.to_bytes()).unwrap())
    }
}

impl fmt::Debug for Kmer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Kmer({self})")
    }
}

/// Reverse complement of an ACGT string. Any other symbol is an error.
pub fn reverse_complement(s: &[u8]) -> Result<Vec<u8>> {
    s.iter()
        .rev()
        .map(|&c| match c {
            b'A' => Ok(b'T'),
            b'C' => Ok(b'G'),
            b'G' => Ok(b'C'),
            b'T' => Ok(b'A'),
            other => Err(Error::NonAcgt(other as char)),
        })
        .collect()
}

/// Reverse complement that keeps `N` (and any other symbol) as `N`.
pub fn reverse_complement_lenient(s: &[u8]) -> Vec<u8> {
    s.iter()
        .rev()
        .map(|&c| match c {
            b'A' => b'T',
            b'C' => b'G',
            b'G' => b'C',
            b'T' => b'A',
            _ => b'N',
        })
        .collect()
}

/// A sequencing read or reference record. Sequence is upper-case over {A,C,G,T,N}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Read {
    pub id: String,
    pub seq: Vec<u8>,
    pub qual: Option<Vec<u8>>,
}

impl Read {
    /// Normalizes the sequence: lower case is folded, anything outside ACGT becomes `N`.
    pub fn new(id: impl Into<String>, seq: &[u8]) -> Read {
        Read {
            id: id.into(),
            seq: normalize(seq),
            qual: None,
        }
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }
}

pub(crate) fn normalize(seq: &[u8]) -> Vec<u8> {
    seq.iter()
        .map(|&c| match c.to_ascii_uppercase() {
            b @ (b'A' | b'C' | b'G' | b'T') => b,
            _ => b'N',
        })
        .collect()
}

/// Rolling iterator over the N-free windows of length `k` of a sequence.
///
/// Yields `(position, kmer)` in ascending position order; windows containing a
/// non-ACGT symbol are skipped.
pub struct KmerIter<'a> {
    seq: &'a [u8],
    k: usize,
    pos: usize,
    bits: u128,
    valid: usize,
}

impl<'a> KmerIter<'a> {
    pub fn new(seq: &'a [u8], k: usize) -> KmerIter<'a> {
        assert!((1..=MAX_K).contains(&k), "k out of range: {k}");
        KmerIter {
            seq,
            k,
            pos: 0,
            bits: 0,
            valid: 0,
        }
    }
}

impl Iterator for KmerIter<'_> {
    type Item = (usize, Kmer);

    fn next(&mut self) -> Option<(usize, Kmer)> {
        while self.pos < self.seq.len() {
            let c = self.seq[self.pos];
            self.pos += 1;
            match code_of(c) {
                Some(code) => {
                    self.bits = ((self.bits << 2) | code as u128) & mask(self.k);
                    self.valid += 1;
                    if self.valid >= self.k {
                        return Some((self.pos - self.k, Kmer::from_bits(self.bits, self.k)));
                    }
                }
                None => self.valid = 0,
            }
        }
        None
    }
}

/// N-free k-mer windows of a read with their start positions.
pub fn enumerate_kmers(read: &Read, k: usize) -> Result<Vec<(usize, Kmer)>> {
    check_k(k)?;
    Ok(KmerIter::new(&read.seq, k).collect())
}

pub fn check_k(k: usize) -> Result<()> {
    if (2..=MAX_K).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidK(k))
    }
}
