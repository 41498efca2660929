//! Compacted de Bruijn graph: unitig construction from a solid k-mer set, walk
//! sequences and small-instance path enumeration.

use std::io::Write;
use std::path::Path;

use rustc_hash::FxHashSet;

use crate::census::SolidKmerSet;
use crate::error::{Error, Result};
use crate::seq::{check_k, reverse_complement, Base, Kmer, Read};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    Forward,
    Reverse,
}

impl Orientation {
    pub fn flip(self) -> Orientation {
        match self {
            Orientation::Forward => Orientation::Reverse,
            Orientation::Reverse => Orientation::Forward,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Orientation::Forward => '+',
            Orientation::Reverse => '-',
        }
    }
}

/// One node of the compacted graph. `seq` is the stored orientation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unitig {
    pub id: usize,
    pub seq: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompactedGraph {
    k: usize,
    unitigs: Vec<Unitig>,
    rc: Vec<Vec<u8>>,
    // forward-orientation (k-1)-prefix and (k-1)-suffix of each unitig
    ends: Vec<(Kmer, Kmer)>,
}

impl CompactedGraph {
    /// Wraps explicit unitig sequences; ids follow the given order.
    pub fn from_sequences(k: usize, seqs: Vec<Vec<u8>>) -> Result<Self> {
        check_k(k)?;
        let mut unitigs = Vec::with_capacity(seqs.len());
        let mut rc = Vec::with_capacity(seqs.len());
        let mut ends = Vec::with_capacity(seqs.len());
        for (id, seq) in seqs.into_iter().enumerate() {
            if seq.len() < k {
                return Err(Error::Format(format!(
                    "unitig {id} shorter than k ({} < {k})",
                    seq.len()
                )));
            }
            rc.push(reverse_complement(&seq)?);
            ends.push((
                Kmer::from_bytes(&seq[..k - 1])?,
                Kmer::from_bytes(&seq[seq.len() - (k - 1)..])?,
            ));
            unitigs.push(Unitig { id, seq });
        }
        Ok(CompactedGraph { k, unitigs, rc, ends })
    }

    /// Loads unitigs from FASTA; ids are assigned in file order.
    pub fn read_fasta(path: &Path, k: usize) -> Result<Self> {
        let reads = crate::io::read_all(path)?;
        Self::from_sequences(k, reads.into_iter().map(|r| r.seq).collect())
    }

    pub fn write_fasta<W: Write>(&self, out: &mut W) -> Result<()> {
        for u in &self.unitigs {
            crate::io::write_fasta_record(out, &format!("u{}", u.id), &u.seq)?;
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn unitigs(&self) -> &[Unitig] {
        &self.unitigs
    }

    pub fn len(&self) -> usize {
        self.unitigs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitigs.is_empty()
    }

    pub fn unitig_len(&self, id: usize) -> usize {
        self.unitigs[id].seq.len()
    }

    pub fn mean_len(&self) -> f64 {
        if self.unitigs.is_empty() {
            return 0.0;
        }
        self.total_len() as f64 / self.unitigs.len() as f64
    }

    pub fn total_len(&self) -> usize {
        self.unitigs.iter().map(|u| u.seq.len()).sum()
    }

    /// Unitig text read in the given orientation.
    #[inline]
    pub fn oriented(&self, id: usize, o: Orientation) -> &[u8] {
        match o {
            Orientation::Forward => &self.unitigs[id].seq,
            Orientation::Reverse => &self.rc[id],
        }
    }

    /// First k-1 bases of the unitig read in orientation `o`.
    #[inline]
    pub fn oriented_prefix(&self, id: usize, o: Orientation) -> Kmer {
        match o {
            Orientation::Forward => self.ends[id].0,
            Orientation::Reverse => self.ends[id].1.reverse_complement(),
        }
    }

    /// Last k-1 bases of the unitig read in orientation `o`.
    #[inline]
    pub fn oriented_suffix(&self, id: usize, o: Orientation) -> Kmer {
        match o {
            Orientation::Forward => self.ends[id].1,
            Orientation::Reverse => self.ends[id].0.reverse_complement(),
        }
    }
}

/// Out-neighbors of an oriented k-mer, looked up canonically.
pub fn successors(solid: &SolidKmerSet, x: Kmer) -> impl Iterator<Item = Kmer> + '_ {
    Base::ALL
        .into_iter()
        .map(move |b| x.push_back(b))
        .filter(move |y| solid.contains(y))
}

/// In-neighbors of an oriented k-mer, looked up canonically.
pub fn predecessors(solid: &SolidKmerSet, x: Kmer) -> impl Iterator<Item = Kmer> + '_ {
    Base::ALL
        .into_iter()
        .map(move |b| x.push_front(b))
        .filter(move |y| solid.contains(y))
}

/// Walks right from `start` while the path stays non-branching, returning the
/// appended bases. Every absorbed k-mer is marked in `used`.
fn extend_right(solid: &SolidKmerSet, start: Kmer, used: &mut FxHashSet<u128>) -> Vec<u8> {
    let mut bases = Vec::new();
    let mut x = start;
    loop {
        if x.suffix().is_palindrome() {
            break;
        }
        let mut succ = successors(solid, x);
        let (Some(y), None) = (succ.next(), succ.next()) else {
            break;
        };
        let cy = y.canonical().bits();
        if cy == x.canonical().bits() || predecessors(solid, y).count() != 1 {
            break;
        }
        if !used.insert(cy) {
            break;
        }
        bases.push(y.base(y.len() - 1).to_ascii());
        x = y;
    }
    bases
}

/// Merges every maximal non-branching path of the solid set into a unitig.
///
/// Seeds are taken in ascending canonical order and each unitig is stored in
/// whichever orientation is lexicographically smaller, so ids and sequences
/// depend only on the set.
pub fn compact(solid: &SolidKmerSet) -> Result<CompactedGraph> {
    let k = solid.k();
    let mut used: FxHashSet<u128> = FxHashSet::default();
    used.reserve(solid.len());
    let mut seqs = Vec::new();
    for seed in solid.iter() {
        if !used.insert(seed.bits()) {
            continue;
        }
        let right = extend_right(solid, seed, &mut used);
        let left = extend_right(solid, seed.reverse_complement(), &mut used);
        let mut seq = Vec::with_capacity(left.len() + k + right.len());
        seq.extend(left.iter().rev().map(|&c| complement_ascii(c)));
        seq.extend(seed.to_bytes());
        seq.extend(right);
        let rc = reverse_complement(&seq)?;
        seqs.push(if rc < seq { rc } else { seq });
    }
    CompactedGraph::from_sequences(k, seqs)
}

fn complement_ascii(c: u8) -> u8 {
    match c {
        b'A' => b'T',
        b'C' => b'G',
        b'G' => b'C',
        _ => b'A',
    }
}

/// Convenience: census, coverage filter and compaction in one call.
pub fn build_graph(reads: &[Read], k: usize, min_count: u64) -> Result<(SolidKmerSet, CompactedGraph)> {
    let census = crate::census::count_kmers(reads, k)?;
    let solid = crate::census::solid_set(&census, min_count)?;
    let graph = compact(&solid)?;
    Ok((solid, graph))
}

/// A sequence of node-centric de Bruijn graph nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DbgWalk {
    pub nodes: Vec<Kmer>,
}

impl DbgWalk {
    pub fn new(nodes: Vec<Kmer>) -> Self {
        DbgWalk { nodes }
    }

    /// The walk whose generated sequence is `seq`, one node per k-mer window.
    pub fn from_sequence(seq: &[u8], k: usize) -> Result<Self> {
        check_k(k)?;
        if seq.len() < k {
            return Err(Error::InvalidLength {
                expected: k,
                found: seq.len(),
            });
        }
        let nodes = seq.windows(k).map(Kmer::from_bytes).collect::<Result<Vec<_>>>()?;
        Ok(DbgWalk { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True when no node (up to reverse complement) is visited twice.
    pub fn is_path(&self) -> bool {
        let mut seen = FxHashSet::default();
        self.nodes.iter().all(|n| seen.insert(n.canonical().bits()))
    }
}

/// Sequence generated by a walk: the first node followed by the last base of each later node.
pub fn walk_sequence(walk: &DbgWalk) -> Result<Vec<u8>> {
    let first = walk
        .nodes
        .first()
        .ok_or(Error::InvalidLength { expected: 1, found: 0 })?;
    let k = first.len();
    let mut out = first.to_bytes();
    for (i, pair) in walk.nodes.windows(2).enumerate() {
        if pair[1].len() != k || pair[0].suffix() != pair[1].prefix() {
            return Err(Error::NotAWalk(i, i + 1));
        }
        out.push(pair[1].base(k - 1).to_ascii());
    }
    Ok(out)
}

#[derive(Clone, Debug, Default)]
pub struct PathEnumeration {
    pub paths: Vec<DbgWalk>,
    /// Set when the expansion budget ran out before the search finished.
    pub truncated: bool,
    pub expansions: usize,
}

/// All node paths (no repeated node) with exactly `len_nodes` nodes starting at
/// `start`, following out-edges of the solid set. Intended for small graphs only.
pub fn enumerate_paths(solid: &SolidKmerSet, start: Kmer, len_nodes: usize, budget: usize) -> PathEnumeration {
    let mut out = PathEnumeration::default();
    if len_nodes == 0 || start.len() != solid.k() || !solid.contains(&start) {
        return out;
    }
    let mut stack = vec![start];
    let mut on_path: FxHashSet<u128> = FxHashSet::default();
    on_path.insert(start.canonical().bits());
    dfs_paths(solid, len_nodes, budget, &mut stack, &mut on_path, &mut out);
    out
}

fn dfs_paths(
    solid: &SolidKmerSet,
    len_nodes: usize,
    budget: usize,
    stack: &mut Vec<Kmer>,
    on_path: &mut FxHashSet<u128>,
    out: &mut PathEnumeration,
) {
    if stack.len() == len_nodes {
        out.paths.push(DbgWalk::new(stack.clone()));
        return;
    }
    let last = *stack.last().unwrap();
    for next in successors(solid, last) {
        if out.expansions >= budget {
            out.truncated = true;
            return;
        }
        out.expansions += 1;
        let c = next.canonical().bits();
        if !on_path.insert(c) {
            continue;
        }
        stack.push(next);
        dfs_paths(solid, len_nodes, budget, stack, on_path, out);
        stack.pop();
        on_path.remove(&c);
        if out.truncated {
            return;
        }
    }
}
