//! Anchor index over unitig end overlaps, and the interior position index used
//! by the single-unitig mapper.
//!
//! Both tables are keyed by canonical (k-1)-mers. Entries remember whether the
//! unitig text at that spot reads as the canonical key or as its reverse
//! complement, so a query can answer relative to the word exactly as written.

use std::io::Write;
use std::mem::size_of;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::graph::{CompactedGraph, Orientation};
use crate::seq::{check_k, Kmer, KmerIter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    StartsWith,
    EndsWith,
}

/// A unitig, read in `orientation`, starts or ends with the queried overlap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Incidence {
    pub unitig_id: usize,
    pub orientation: Orientation,
    pub side: Side,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct EndEntry {
    unitig: u32,
    // false: prefix of the stored unitig, true: suffix
    is_suffix: bool,
    // the stored text equals the canonical key (rather than its reverse complement)
    text_is_canonical: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnchorIndex {
    k: usize,
    table: FxHashMap<u128, Vec<EndEntry>>,
}

/// Indexes every unitig's (k-1)-prefix and (k-1)-suffix.
pub fn build_anchor_index(graph: &CompactedGraph) -> AnchorIndex {
    let k = graph.k();
    let mut table: FxHashMap<u128, Vec<EndEntry>> = FxHashMap::default();
    for u in graph.unitigs() {
        let ends = [
            (graph.oriented_prefix(u.id, Orientation::Forward), false),
            (graph.oriented_suffix(u.id, Orientation::Forward), true),
        ];
        for (text, is_suffix) in ends {
            let canon = text.canonical();
            table.entry(canon.bits()).or_default().push(EndEntry {
                unitig: u.id as u32,
                is_suffix,
                text_is_canonical: canon == text,
            });
        }
    }
    for v in table.values_mut() {
        v.sort_unstable();
    }
    AnchorIndex { k, table }
}

impl AnchorIndex {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn key_count(&self) -> usize {
        self.table.len()
    }

    pub fn entry_count(&self) -> usize {
        self.table.values().map(Vec::len).sum()
    }

    pub fn contains(&self, mer: &Kmer) -> bool {
        self.table.contains_key(&mer.canonical().bits())
    }

    /// Incidences of unitigs starting or ending with `mer` as written, sorted by
    /// unitig id, then orientation, then side. A palindromic key yields both
    /// orientation classes.
    pub fn query(&self, mer: &Kmer) -> Result<Vec<Incidence>> {
        if mer.len() + 1 != self.k {
            return Err(Error::InvalidLength {
                expected: self.k - 1,
                found: mer.len(),
            });
        }
        Ok(self.query_unchecked(mer))
    }

    pub(crate) fn query_unchecked(&self, mer: &Kmer) -> Vec<Incidence> {
        let canon = mer.canonical();
        let Some(entries) = self.table.get(&canon.bits()) else {
            return Vec::new();
        };
        let palindrome = mer.is_palindrome();
        let as_written_is_canonical = canon == *mer;
        let mut out = Vec::with_capacity(entries.len() + palindrome as usize * entries.len());
        for e in entries {
            let same = e.text_is_canonical == as_written_is_canonical;
            let u = e.unitig as usize;
            if same || palindrome {
                // the forward text matches the word
                out.push(Incidence {
                    unitig_id: u,
                    orientation: Orientation::Forward,
                    side: if e.is_suffix { Side::EndsWith } else { Side::StartsWith },
                });
            }
            if !same || palindrome {
                // the reverse-complemented text matches; prefix becomes the end
                out.push(Incidence {
                    unitig_id: u,
                    orientation: Orientation::Reverse,
                    side: if e.is_suffix { Side::StartsWith } else { Side::EndsWith },
                });
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Oriented unitigs whose text starts with `mer`, in tie-break order.
    pub(crate) fn starting_with(&self, mer: &Kmer) -> Vec<(usize, Orientation)> {
        self.query_unchecked(mer)
            .into_iter()
            .filter(|i| i.side == Side::StartsWith)
            .map(|i| (i.unitig_id, i.orientation))
            .collect()
    }

    /// Canonical keys in ascending order.
    pub fn keys(&self) -> Vec<Kmer> {
        let mut keys: Vec<u128> = self.table.keys().copied().collect();
        keys.sort_unstable();
        keys.into_iter().map(|b| Kmer::from_bits(b, self.k - 1)).collect()
    }

    /// Rough heap footprint of the table in bytes.
    pub fn approx_bytes(&self) -> usize {
        let buckets = self.table.capacity() * (size_of::<(u128, Vec<EndEntry>)>() + 1);
        let lists: usize = self.table.values().map(|v| v.capacity() * size_of::<EndEntry>()).sum();
        buckets + lists
    }
}

/// One placement of a (k-1)-mer inside a unitig. `offset` is measured in the
/// coordinates of the unitig read in `orientation`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occurrence {
    pub unitig_id: usize,
    pub orientation: Orientation,
    pub offset: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct PosEntry {
    unitig: u32,
    offset: u32,
    text_is_canonical: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteriorIndex {
    k: usize,
    min_unitig_len: usize,
    stride: usize,
    unitig_lens: Vec<u32>,
    keys: Vec<u128>,
    entries: Vec<PosEntry>,
    // key -> range into `entries`
    ranges: FxHashMap<u128, (u32, u32)>,
}

/// Indexes every `stride`-th (k-1)-mer position of each unitig strictly longer
/// than `min_unitig_len`.
pub fn build_interior_index(graph: &CompactedGraph, min_unitig_len: usize, stride: usize) -> Result<InteriorIndex> {
    if stride == 0 {
        return Err(Error::Config("interior index stride must be >= 1".into()));
    }
    let k = graph.k();
    let mut pairs: Vec<(u128, PosEntry)> = Vec::new();
    for u in graph.unitigs() {
        if u.seq.len() <= min_unitig_len {
            continue;
        }
        for (off, mer) in KmerIter::new(&u.seq, k - 1) {
            if off % stride != 0 {
                continue;
            }
            let canon = mer.canonical();
            pairs.push((
                canon.bits(),
                PosEntry {
                    unitig: u.id as u32,
                    offset: off as u32,
                    text_is_canonical: canon == mer,
                },
            ));
        }
    }
    pairs.sort_unstable();
    let mut ranges = FxHashMap::default();
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        ranges.insert(pairs[i].0, (i as u32, (j - i) as u32));
        i = j;
    }
    let (keys, entries) = pairs.into_iter().unzip();
    Ok(InteriorIndex {
        k,
        min_unitig_len,
        stride,
        unitig_lens: graph.unitigs().iter().map(|u| u.seq.len() as u32).collect(),
        keys,
        entries,
        ranges,
    })
}

impl InteriorIndex {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn min_unitig_len(&self) -> usize {
        self.min_unitig_len
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn key_count(&self) -> usize {
        self.ranges.len()
    }

    /// Placements of `mer` as written, sorted by unitig, orientation, offset.
    pub fn query(&self, mer: &Kmer) -> Result<Vec<Occurrence>> {
        if mer.len() + 1 != self.k {
            return Err(Error::InvalidLength {
                expected: self.k - 1,
                found: mer.len(),
            });
        }
        let mut out = Vec::new();
        self.query_into(mer, &mut out);
        Ok(out)
    }

    pub(crate) fn query_into(&self, mer: &Kmer, out: &mut Vec<Occurrence>) {
        out.clear();
        let canon = mer.canonical();
        let Some(&(start, len)) = self.ranges.get(&canon.bits()) else {
            return;
        };
        let palindrome = mer.is_palindrome();
        let as_written_is_canonical = canon == *mer;
        let w = self.k - 1;
        for e in &self.entries[start as usize..(start + len) as usize] {
            let same = e.text_is_canonical == as_written_is_canonical;
            let u = e.unitig as usize;
            if same || palindrome {
                out.push(Occurrence {
                    unitig_id: u,
                    orientation: Orientation::Forward,
                    offset: e.offset as usize,
                });
            }
            if !same || palindrome {
                out.push(Occurrence {
                    unitig_id: u,
                    orientation: Orientation::Reverse,
                    offset: self.unitig_lens[u] as usize - w - e.offset as usize,
                });
            }
        }
        out.sort_unstable();
    }

    pub fn approx_bytes(&self) -> usize {
        self.entries.capacity() * size_of::<PosEntry>()
            + self.keys.capacity() * size_of::<u128>()
            + self.ranges.capacity() * (size_of::<(u128, (u32, u32))>() + 1)
    }
}

const INDEX_MAGIC: &[u8; 8] = b"DBGINDEX";
const INDEX_VERSION: u16 = 1;

/// Writes both indexes: magic, format version, k, then the anchor table
/// (ascending keys) and the interior table (ascending keys).
pub fn write_indexes<W: Write>(out: &mut W, anchors: &AnchorIndex, interior: &InteriorIndex) -> Result<()> {
    if anchors.k != interior.k {
        return Err(Error::Config("anchor and interior index disagree on k".into()));
    }
    out.write_all(INDEX_MAGIC)?;
    out.write_all(&INDEX_VERSION.to_le_bytes())?;
    out.write_all(&(anchors.k as u32).to_le_bytes())?;
    let keys = anchors.keys();
    out.write_all(&(keys.len() as u64).to_le_bytes())?;
    out.write_all(&(anchors.entry_count() as u64).to_le_bytes())?;
    for key in keys {
        let list = &anchors.table[&key.bits()];
        out.write_all(&key.bits().to_le_bytes())?;
        out.write_all(&(list.len() as u32).to_le_bytes())?;
        for e in list {
            out.write_all(&e.unitig.to_le_bytes())?;
            out.write_all(&[e.is_suffix as u8 | (e.text_is_canonical as u8) << 1])?;
        }
    }
    out.write_all(&(interior.min_unitig_len as u64).to_le_bytes())?;
    out.write_all(&(interior.stride as u64).to_le_bytes())?;
    out.write_all(&(interior.unitig_lens.len() as u64).to_le_bytes())?;
    for l in &interior.unitig_lens {
        out.write_all(&l.to_le_bytes())?;
    }
    out.write_all(&(interior.entries.len() as u64).to_le_bytes())?;
    for (key, e) in interior.keys.iter().zip(&interior.entries) {
        out.write_all(&key.to_le_bytes())?;
        out.write_all(&e.unitig.to_le_bytes())?;
        out.write_all(&e.offset.to_le_bytes())?;
        out.write_all(&[e.text_is_canonical as u8])?;
    }
    Ok(())
}

struct Reader<'a, R> {
    inner: &'a mut R,
}

impl<R: std::io::Read> Reader<'_, R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b)?;
        Ok(b)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.bytes()?))
    }
}

pub fn read_indexes<R: std::io::Read>(input: &mut R) -> Result<(AnchorIndex, InteriorIndex)> {
    let mut r = Reader { inner: input };
    if &r.bytes::<8>()? != INDEX_MAGIC {
        return Err(Error::Format("not an index file".into()));
    }
    let version = r.u16()?;
    if version != INDEX_VERSION {
        return Err(Error::Format(format!("unsupported index version {version}")));
    }
    let k = r.u32()? as usize;
    check_k(k)?;
    let n_keys = r.u64()? as usize;
    let _n_entries = r.u64()?;
    let mut table = FxHashMap::default();
    table.reserve(n_keys);
    for _ in 0..n_keys {
        let key = r.u128()?;
        let n = r.u32()? as usize;
        let mut list = Vec::with_capacity(n);
        for _ in 0..n {
            let unitig = r.u32()?;
            let flags = r.u8()?;
            list.push(EndEntry {
                unitig,
                is_suffix: flags & 1 != 0,
                text_is_canonical: flags & 2 != 0,
            });
        }
        table.insert(key, list);
    }
    let anchors = AnchorIndex { k, table };

    let min_unitig_len = r.u64()? as usize;
    let stride = r.u64()? as usize;
    let n_unitigs = r.u64()? as usize;
    let mut unitig_lens = Vec::with_capacity(n_unitigs);
    for _ in 0..n_unitigs {
        unitig_lens.push(r.u32()?);
    }
    let n = r.u64()? as usize;
    let mut keys = Vec::with_capacity(n);
    let mut entries = Vec::with_capacity(n);
    for _ in 0..n {
        keys.push(r.u128()?);
        let unitig = r.u32()?;
        let offset = r.u32()?;
        let flag = r.u8()?;
        if unitig as usize >= n_unitigs {
            return Err(Error::Format("interior entry references unknown unitig".into()));
        }
        entries.push(PosEntry {
            unitig,
            offset,
            text_is_canonical: flag != 0,
        });
    }
    let mut ranges = FxHashMap::default();
    let mut i = 0;
    while i < keys.len() {
        let mut j = i;
        while j < keys.len() && keys[j] == keys[i] {
            j += 1;
        }
        ranges.insert(keys[i], (i as u32, (j - i) as u32));
        i = j;
    }
    let interior = InteriorIndex {
        k,
        min_unitig_len,
        stride,
        unitig_lens,
        keys,
        entries,
        ranges,
    };
    Ok((anchors, interior))
}
