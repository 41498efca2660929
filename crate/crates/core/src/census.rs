//! Exact canonical k-mer counting and the coverage filter that yields solid k-mers.

use std::io::Write;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::seq::{check_k, Kmer, KmerIter, Read};

/// Occurrence counts of canonical k-mers over a read set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KmerCensus {
    k: usize,
    counts: FxHashMap<u128, u64>,
}

impl KmerCensus {
    pub fn new(k: usize) -> Result<Self> {
        check_k(k)?;
        Ok(KmerCensus {
            k,
            counts: FxHashMap::default(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn add_sequence(&mut self, seq: &[u8]) {
        for (_, km) in KmerIter::new(seq, self.k) {
            *self.counts.entry(km.canonical().bits()).or_insert(0) += 1;
        }
    }

    pub fn merge(&mut self, other: KmerCensus) {
        debug_assert_eq!(self.k, other.k);
        if other.counts.len() > self.counts.len() {
            let mine = std::mem::replace(&mut self.counts, other.counts);
            for (km, n) in mine {
                *self.counts.entry(km).or_insert(0) += n;
            }
        } else {
            for (km, n) in other.counts {
                *self.counts.entry(km).or_insert(0) += n;
            }
        }
    }

    pub fn count(&self, kmer: &Kmer) -> u64 {
        self.counts.get(&kmer.canonical().bits()).copied().unwrap_or(0)
    }

    /// Number of distinct canonical k-mers.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Sum of all counts, i.e. the number of N-free windows seen.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Kmer, u64)> + '_ {
        self.counts.iter().map(move |(&b, &n)| (Kmer::from_bits(b, self.k), n))
    }
}

/// Counts canonical k-mers, spreading reads over worker threads when the
/// `parallel` feature is on. Counts do not depend on worker count or read order.
pub fn count_kmers(reads: &[Read], k: usize) -> Result<KmerCensus> {
    #[cfg(feature = "parallel")]
    {
        count_kmers_parallel(reads, k)
    }
    #[cfg(not(feature = "parallel"))]
    {
        count_kmers_sequential(reads, k)
    }
}

pub fn count_kmers_sequential(reads: &[Read], k: usize) -> Result<KmerCensus> {
    let mut census = KmerCensus::new(k)?;
    for r in reads {
        census.add_sequence(&r.seq);
    }
    Ok(census)
}

#[cfg(feature = "parallel")]
pub fn count_kmers_parallel(reads: &[Read], k: usize) -> Result<KmerCensus> {
    use rayon::prelude::*;

    check_k(k)?;
    let total_len: usize = reads.iter().map(|r| r.len()).sum();
    // a single long reference would otherwise land on one worker
    if reads.len() < 64 && total_len > 1 << 16 {
        let chunk = 1 << 15;
        return Ok(reads
            .par_iter()
            .flat_map_iter(|r| {
                let n = r.seq.len();
                (0..n.div_ceil(chunk)).map(move |i| {
                    let start = i * chunk;
                    let end = (start + chunk + k - 1).min(n);
                    &r.seq[start..end]
                })
            })
            .fold(
                || KmerCensus::new(k).unwrap(),
                |mut c, s| {
                    c.add_sequence(s);
                    c
                },
            )
            .reduce(
                || KmerCensus::new(k).unwrap(),
                |mut a, b| {
                    a.merge(b);
                    a
                },
            ));
    }
    Ok(reads
        .par_chunks(1024)
        .fold(
            || KmerCensus::new(k).unwrap(),
            |mut c, chunk| {
                for r in chunk {
                    c.add_sequence(&r.seq);
                }
                c
            },
        )
        .reduce(
            || KmerCensus::new(k).unwrap(),
            |mut a, b| {
                a.merge(b);
                a
            },
        ))
}

/// Canonical k-mers that passed the coverage threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolidKmerSet {
    k: usize,
    sorted: Vec<u128>,
    members: FxHashSet<u128>,
}

impl SolidKmerSet {
    /// Builds a solid set from arbitrary k-mers; they are canonicalized and deduplicated.
    pub fn from_kmers(k: usize, kmers: impl IntoIterator<Item = Kmer>) -> Result<Self> {
        check_k(k)?;
        let mut sorted = Vec::new();
        for km in kmers {
            if km.len() != k {
                return Err(Error::InvalidLength {
                    expected: k,
                    found: km.len(),
                });
            }
            sorted.push(km.canonical().bits());
        }
        Ok(Self::from_canonical_bits(k, sorted))
    }

    fn from_canonical_bits(k: usize, mut sorted: Vec<u128>) -> Self {
        sorted.sort_unstable();
        sorted.dedup();
        let members = sorted.iter().copied().collect();
        SolidKmerSet { k, sorted, members }
    }

    /// All canonical k-mers of the given sequences (coverage threshold 1).
    pub fn from_sequences<'a>(k: usize, seqs: impl IntoIterator<Item = &'a [u8]>) -> Result<Self> {
        check_k(k)?;
        let mut bits = Vec::new();
        for s in seqs {
            bits.extend(KmerIter::new(s, k).map(|(_, km)| km.canonical().bits()));
        }
        Ok(Self::from_canonical_bits(k, bits))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Membership of a k-mer in either orientation.
    #[inline]
    pub fn contains(&self, kmer: &Kmer) -> bool {
        self.members.contains(&kmer.canonical().bits())
    }

    /// Canonical members in ascending packed order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = Kmer> + '_ {
        self.sorted.iter().map(move |&b| Kmer::from_bits(b, self.k))
    }

    const MAGIC: &'static [u8; 8] = b"DBGSOLID";
    const VERSION: u32 = 1;

    fn bytes_per_kmer(k: usize) -> usize {
        (2 * k).div_ceil(8)
    }

    /// Binary layout: magic, format version, k, count, then each k-mer in
    /// ascending order as `ceil(2k/8)` little-endian bytes.
    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        out.write_all(Self::MAGIC)?;
        out.write_all(&Self::VERSION.to_le_bytes())?;
        out.write_all(&(self.k as u32).to_le_bytes())?;
        out.write_all(&(self.sorted.len() as u64).to_le_bytes())?;
        let width = Self::bytes_per_kmer(self.k);
        for b in &self.sorted {
            out.write_all(&b.to_le_bytes()[..width])?;
        }
        Ok(())
    }

    pub fn read_from<R: std::io::Read>(input: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != Self::MAGIC {
            return Err(Error::Format("not a solid k-mer file".into()));
        }
        let mut w4 = [0u8; 4];
        input.read_exact(&mut w4)?;
        let version = u32::from_le_bytes(w4);
        if version != Self::VERSION {
            return Err(Error::Format(format!("unsupported solid set version {version}")));
        }
        input.read_exact(&mut w4)?;
        let k = u32::from_le_bytes(w4) as usize;
        check_k(k)?;
        let mut w8 = [0u8; 8];
        input.read_exact(&mut w8)?;
        let count = u64::from_le_bytes(w8) as usize;
        let width = Self::bytes_per_kmer(k);
        let mut sorted = Vec::with_capacity(count);
        let mut buf = [0u8; 16];
        for _ in 0..count {
            input.read_exact(&mut buf[..width])?;
            let bits = u128::from_le_bytes(buf);
            let km = Kmer::from_bits(bits, k);
            if km.bits() != bits || !km.is_canonical() {
                return Err(Error::Format("corrupt k-mer record".into()));
            }
            sorted.push(bits);
        }
        if sorted.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format("k-mers not strictly ascending".into()));
        }
        let members = sorted.iter().copied().collect();
        Ok(SolidKmerSet { k, sorted, members })
    }
}

/// Keeps exactly the census keys with count >= `min_count`.
pub fn solid_set(census: &KmerCensus, min_count: u64) -> Result<SolidKmerSet> {
    if min_count == 0 {
        return Err(Error::Config("coverage threshold must be >= 1".into()));
    }
    let bits = census
        .counts
        .iter()
        .filter(|&(_, &n)| n >= min_count)
        .map(|(&b, _)| b)
        .collect();
    Ok(SolidKmerSet::from_canonical_bits(census.k, bits))
}
