//! Hamming-distance read mapping on the compacted graph.
//!
//! Three mappers share one result type:
//! - [`map_single_unitig`] places a read entirely inside one unitig, seeded from
//!   the interior index;
//! - [`map_branching`] is the greedy anchor / extremity / cover algorithm for
//!   reads spanning several unitigs;
//! - [`map_exhaustive`] explores every junction choice from the same begin
//!   anchors with branch-and-bound, and serves as the accuracy oracle.
//!
//! Every mapper works on one strand at a time; the public entry points combine
//! both strands and pick the cheaper result.

mod exhaustive;
mod greedy;
mod single;

use std::cmp::Ordering;
use std::fmt;

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::graph::{CompactedGraph, Orientation};
use crate::index::{AnchorIndex, Incidence, InteriorIndex};
use crate::seq::{reverse_complement_lenient, Kmer, KmerIter, Read};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StrandMode {
    Both,
    ForwardOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MappingParams {
    /// Maximum Hamming cost of a reported mapping.
    pub mismatch_budget: u32,
    /// How many leading (and trailing) anchors may fail before giving up.
    pub anchor_failures: usize,
    pub strand_mode: StrandMode,
}

impl Default for MappingParams {
    fn default() -> Self {
        MappingParams {
            mismatch_budget: 2,
            anchor_failures: 2,
            strand_mode: StrandMode::Both,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strand {
    Forward,
    Reverse,
}

impl Strand {
    pub fn symbol(self) -> char {
        match self {
            Strand::Forward => '+',
            Strand::Reverse => '-',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    SingleUnitig,
    BranchingPath,
    Unmapped,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::SingleUnitig => "single_unitig",
            Regime::BranchingPath => "branching_path",
            Regime::Unmapped => "unmapped",
        }
    }
}

/// Why a read was left unmapped. Variants are ordered by how far the search got.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FailureReason {
    NoAnchor,
    BeginNotFound,
    EndNotFound,
    CoverFailed,
    BudgetExceeded,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureReason::NoAnchor => "no_anchor",
            FailureReason::BeginNotFound => "begin_not_found",
            FailureReason::EndNotFound => "end_not_found",
            FailureReason::CoverFailed => "cover_failed",
            FailureReason::BudgetExceeded => "budget_exceeded",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathStep {
    pub unitig_id: usize,
    pub orientation: Orientation,
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}{}", self.unitig_id, self.orientation.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingResult {
    pub read_id: String,
    pub strand: Option<Strand>,
    /// Oriented unitigs; consecutive ones share a (k-1) overlap.
    pub path: Vec<PathStep>,
    /// Offset of the mapped strand's first base inside the first path unitig.
    pub start_offset: usize,
    pub mismatches: u32,
    /// Mismatching positions in the coordinates of the read as given, ascending.
    pub mismatch_positions: Vec<usize>,
    pub regime: Regime,
    pub reason: Option<FailureReason>,
    /// The expanded node sequence visits some k-mer twice (a walk, not a path).
    pub repeats_node: bool,
    /// An exhaustive search hit its expansion budget.
    pub truncated: bool,
}

impl MappingResult {
    pub fn unmapped(read_id: &str, reason: FailureReason) -> Self {
        MappingResult {
            read_id: read_id.to_string(),
            strand: None,
            path: Vec::new(),
            start_offset: 0,
            mismatches: 0,
            mismatch_positions: Vec::new(),
            regime: Regime::Unmapped,
            reason: Some(reason),
            repeats_node: false,
            truncated: false,
        }
    }

    pub fn is_mapped(&self) -> bool {
        self.regime != Regime::Unmapped
    }

    /// Cost as an orderable value; unmapped sorts after every mapped result.
    pub fn cost(&self) -> Option<u32> {
        self.is_mapped().then_some(self.mismatches)
    }
}

/// A (k-1)-mer of the read that is a unitig end overlap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectedOverlap {
    pub position: usize,
    /// The word as it appears on the read.
    pub key: Kmer,
    pub incidences: Vec<Incidence>,
}

/// Shared immutable state for mapping: the graph and both indexes.
#[derive(Clone, Copy)]
pub struct MapContext<'a> {
    pub graph: &'a CompactedGraph,
    pub anchors: &'a AnchorIndex,
    pub interior: &'a InteriorIndex,
}

impl<'a> MapContext<'a> {
    pub fn new(graph: &'a CompactedGraph, anchors: &'a AnchorIndex, interior: &'a InteriorIndex) -> Self {
        MapContext {
            graph,
            anchors,
            interior,
        }
    }

    fn k(&self) -> usize {
        self.graph.k()
    }
}

/// A mapping found on one strand, before it is turned into a [`MappingResult`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Hit {
    pub path: Vec<PathStep>,
    pub start_offset: usize,
    pub mismatches: u32,
}

/// Tracks the deepest stage reached by a failed search and whether the
/// failures at that stage were all caused by the mismatch budget.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct FailureTracker {
    stage: Option<FailureReason>,
    structural: bool,
}

impl FailureTracker {
    pub fn note(&mut self, stage: FailureReason, over_budget: bool) {
        match self.stage {
            Some(s) if s > stage => {}
            Some(s) if s == stage => self.structural |= !over_budget,
            _ => {
                self.stage = Some(stage);
                self.structural = !over_budget;
            }
        }
    }

    pub fn merge(&mut self, other: FailureTracker) {
        if let Some(stage) = other.stage {
            self.note(stage, !other.structural);
        }
    }

    pub fn reason(&self) -> FailureReason {
        match self.stage {
            None => FailureReason::NoAnchor,
            Some(s) if self.structural => s,
            Some(_) => FailureReason::BudgetExceeded,
        }
    }
}

/// Hamming distance that gives up once it exceeds `limit`.
#[inline]
pub(crate) fn bounded_hamming(a: &[u8], b: &[u8], limit: u32) -> Option<u32> {
    debug_assert_eq!(a.len(), b.len());
    let mut d = 0;
    for (&x, &y) in a.iter().zip(b) {
        if x != y || x == b'N' {
            d += 1;
            if d > limit {
                return None;
            }
        }
    }
    Some(d)
}

/// Overlaps detected on an oriented sequence. Only positions `1..=len-k` are
/// reported: an overlap flush with either read end cannot separate two unitigs
/// that both contribute read bases.
pub(crate) fn detect_on(seq: &[u8], anchors: &AnchorIndex) -> Vec<DetectedOverlap> {
    let k = anchors.k();
    if seq.len() < k + 1 {
        return Vec::new();
    }
    let last = seq.len() - k;
    KmerIter::new(&seq[..last + k - 1], k - 1)
        .filter(|&(p, _)| p >= 1)
        .filter_map(|(position, key)| {
            let incidences = anchors.query_unchecked(&key);
            (!incidences.is_empty()).then_some(DetectedOverlap {
                position,
                key,
                incidences,
            })
        })
        .collect()
}

/// Read windows that hit a unitig end overlap, in ascending position order.
pub fn detect_read_overlaps(read: &Read, anchors: &AnchorIndex) -> Vec<DetectedOverlap> {
    detect_on(&read.seq, anchors)
}

/// Text generated by a path, restricted to `len` bases starting at `start_offset`
/// of the first unitig.
pub fn path_window(graph: &CompactedGraph, path: &[PathStep], start_offset: usize, len: usize) -> Vec<u8> {
    let k = graph.k();
    let mut text = Vec::with_capacity(start_offset + len + k);
    for (i, s) in path.iter().enumerate() {
        let t = graph.oriented(s.unitig_id, s.orientation);
        text.extend_from_slice(if i == 0 { t } else { &t[k - 1..] });
        if text.len() >= start_offset + len {
            break;
        }
    }
    let end = (start_offset + len).min(text.len());
    text[start_offset.min(end)..end].to_vec()
}

struct Candidate {
    hit: Hit,
    strand: Strand,
    regime: Regime,
}

/// Orders candidates: cost, then single-unitig before branching, then a strand
/// preference that depends only on the read (so a read and its reverse
/// complement choose mirrored results), then path.
fn pick(cands: Vec<Candidate>, forward_first: bool) -> Option<Candidate> {
    let strand_rank = |s: Strand| (s == Strand::Forward) != forward_first;
    cands.into_iter().min_by(|a, b| {
        a.hit
            .mismatches
            .cmp(&b.hit.mismatches)
            .then_with(|| regime_rank(a.regime).cmp(&regime_rank(b.regime)))
            .then_with(|| strand_rank(a.strand).cmp(&strand_rank(b.strand)))
            .then_with(|| a.hit.path.cmp(&b.hit.path))
            .then_with(|| a.hit.start_offset.cmp(&b.hit.start_offset))
    })
}

fn regime_rank(r: Regime) -> u8 {
    match r {
        Regime::SingleUnitig => 0,
        Regime::BranchingPath => 1,
        Regime::Unmapped => 2,
    }
}

/// The read on each strand to try, in order.
struct Strands {
    forward: Vec<u8>,
    reverse: Option<Vec<u8>>,
    forward_first: bool,
}

impl Strands {
    fn new(read: &Read, mode: StrandMode) -> Self {
        let reverse = (mode == StrandMode::Both).then(|| reverse_complement_lenient(&read.seq));
        let forward_first = reverse.as_ref().is_none_or(|rc| read.seq <= *rc);
        Strands {
            forward: read.seq.clone(),
            reverse,
            forward_first,
        }
    }

    fn iter(&self) -> impl Iterator<Item = (Strand, &[u8])> {
        std::iter::once((Strand::Forward, self.forward.as_slice()))
            .chain(self.reverse.as_deref().map(|r| (Strand::Reverse, r)))
    }
}

fn check_read(read: &Read, k: usize) -> Result<()> {
    if read.len() < k {
        return Err(Error::ReadBelowK { len: read.len(), k });
    }
    Ok(())
}

fn finish(read: &Read, graph: &CompactedGraph, cand: Option<Candidate>, reason: FailureReason) -> MappingResult {
    let Some(c) = cand else {
        return MappingResult::unmapped(&read.id, reason);
    };
    let len = read.len();
    let oriented: Vec<u8> = match c.strand {
        Strand::Forward => read.seq.clone(),
        Strand::Reverse => reverse_complement_lenient(&read.seq),
    };
    let window = path_window(graph, &c.hit.path, c.hit.start_offset, len);
    let mut positions: Vec<usize> = window
        .iter()
        .zip(&oriented)
        .enumerate()
        .filter(|(_, (a, b))| a != b || **b == b'N')
        .map(|(i, _)| match c.strand {
            Strand::Forward => i,
            Strand::Reverse => len - 1 - i,
        })
        .collect();
    positions.sort_unstable();
    let repeats_node = c.regime == Regime::BranchingPath && window_repeats_kmer(&window, graph.k());
    MappingResult {
        read_id: read.id.clone(),
        strand: Some(c.strand),
        path: c.hit.path,
        start_offset: c.hit.start_offset,
        mismatches: c.hit.mismatches,
        mismatch_positions: positions,
        regime: c.regime,
        reason: None,
        repeats_node,
        truncated: false,
    }
}

fn window_repeats_kmer(window: &[u8], k: usize) -> bool {
    let mut seen = FxHashSet::default();
    KmerIter::new(window, k).any(|(_, km)| !seen.insert(km.canonical().bits()))
}

/// Maps a read entirely inside one unitig.
pub fn map_single_unitig(read: &Read, ctx: &MapContext<'_>, params: &MappingParams) -> Result<MappingResult> {
    check_read(read, ctx.k())?;
    let strands = Strands::new(read, params.strand_mode);
    let mut cands = Vec::new();
    let mut tracker = FailureTracker::default();
    for (strand, seq) in strands.iter() {
        match single::map_on(seq, ctx, params) {
            Ok(hit) => cands.push(Candidate {
                hit,
                strand,
                regime: Regime::SingleUnitig,
            }),
            Err(t) => tracker.merge(t),
        }
    }
    let best = pick(cands, strands.forward_first);
    Ok(finish(read, ctx.graph, best, tracker.reason()))
}

/// Greedy mapping across branching unitig paths.
pub fn map_branching(read: &Read, ctx: &MapContext<'_>, params: &MappingParams) -> Result<MappingResult> {
    check_read(read, ctx.k())?;
    let strands = Strands::new(read, params.strand_mode);
    let mut cands = Vec::new();
    let mut tracker = FailureTracker::default();
    for (strand, seq) in strands.iter() {
        match greedy::map_on(seq, ctx, params) {
            Ok(hit) => cands.push(Candidate {
                hit,
                strand,
                regime: Regime::BranchingPath,
            }),
            Err(t) => tracker.merge(t),
        }
    }
    let best = pick(cands, strands.forward_first);
    Ok(finish(read, ctx.graph, best, tracker.reason()))
}

/// Full pipeline: single-unitig placement, then branching paths; the cheaper
/// mapping wins and ties go to the single-unitig one.
pub fn map_read(read: &Read, ctx: &MapContext<'_>, params: &MappingParams) -> Result<MappingResult> {
    map_read_with(read, ctx, params, Strategy::Greedy)
}

/// Same dispatch as [`map_read`] with the branching stage replaced by the exhaustive search.
pub fn map_read_exhaustive(
    read: &Read,
    ctx: &MapContext<'_>,
    params: &MappingParams,
    expansion_budget: usize,
) -> Result<MappingResult> {
    map_read_with(read, ctx, params, Strategy::Exhaustive { expansion_budget })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Greedy,
    Exhaustive { expansion_budget: usize },
}

pub fn map_read_with(
    read: &Read,
    ctx: &MapContext<'_>,
    params: &MappingParams,
    strategy: Strategy,
) -> Result<MappingResult> {
    check_read(read, ctx.k())?;
    let strands = Strands::new(read, params.strand_mode);
    let mut cands = Vec::new();
    let mut tracker = FailureTracker::default();
    for (strand, seq) in strands.iter() {
        match single::map_on(seq, ctx, params) {
            Ok(hit) => cands.push(Candidate {
                hit,
                strand,
                regime: Regime::SingleUnitig,
            }),
            Err(t) => tracker.merge(t),
        }
    }
    // nothing on the branching side can beat a perfect single-unitig hit
    if cands.iter().any(|c| c.hit.mismatches == 0) {
        let best = pick(cands, strands.forward_first);
        return Ok(finish(read, ctx.graph, best, tracker.reason()));
    }
    let mut truncated = false;
    for (strand, seq) in strands.iter() {
        let outcome = match strategy {
            Strategy::Greedy => greedy::map_on(seq, ctx, params),
            Strategy::Exhaustive { expansion_budget } => {
                let o = exhaustive::map_on(seq, ctx, params, expansion_budget, 1);
                truncated |= o.truncated;
                o.into_best()
            }
        };
        match outcome {
            Ok(hit) => cands.push(Candidate {
                hit,
                strand,
                regime: Regime::BranchingPath,
            }),
            Err(t) => tracker.merge(t),
        }
    }
    let best = pick(cands, strands.forward_first);
    let mut res = finish(read, ctx.graph, best, tracker.reason());
    res.truncated = truncated;
    Ok(res)
}

/// Branch-and-bound search over every junction choice from the greedy
/// mapper's begin anchors. Returns the minimum-cost mapping; `truncated` is
/// set when `expansion_budget` candidate evaluations were not enough.
pub fn map_exhaustive(
    read: &Read,
    ctx: &MapContext<'_>,
    params: &MappingParams,
    expansion_budget: usize,
) -> Result<MappingResult> {
    Ok(map_exhaustive_co_optimal(read, ctx, params, expansion_budget, 1)?
        .into_iter()
        .next()
        .expect("at least one result"))
}

/// Like [`map_exhaustive`] but reports up to `max_results` co-optimal mappings
/// (all on the preferred strand). Always returns at least one result, which
/// is unmapped when nothing was found.
pub fn map_exhaustive_co_optimal(
    read: &Read,
    ctx: &MapContext<'_>,
    params: &MappingParams,
    expansion_budget: usize,
    max_results: usize,
) -> Result<Vec<MappingResult>> {
    check_read(read, ctx.k())?;
    let max_results = max_results.max(1);
    let strands = Strands::new(read, params.strand_mode);
    let mut tracker = FailureTracker::default();
    let mut truncated = false;
    let mut per_strand = Vec::new();
    for (strand, seq) in strands.iter() {
        let o = exhaustive::map_on(seq, ctx, params, expansion_budget, max_results);
        truncated |= o.truncated;
        if o.hits.is_empty() {
            tracker.merge(o.failure);
        } else {
            per_strand.push((strand, o.hits));
        }
    }
    let strand_rank = |s: Strand| (s == Strand::Forward) != strands.forward_first;
    per_strand.sort_by(|a, b| {
        a.1[0]
            .mismatches
            .cmp(&b.1[0].mismatches)
            .then_with(|| strand_rank(a.0).cmp(&strand_rank(b.0)))
    });
    let Some((strand, hits)) = per_strand.into_iter().next() else {
        let mut r = MappingResult::unmapped(&read.id, tracker.reason());
        r.truncated = truncated;
        return Ok(vec![r]);
    };
    Ok(hits
        .into_iter()
        .map(|hit| {
            let mut r = finish(
                read,
                ctx.graph,
                Some(Candidate {
                    hit,
                    strand,
                    regime: Regime::BranchingPath,
                }),
                FailureReason::NoAnchor,
            );
            r.truncated = truncated;
            r
        })
        .collect())
}

/// Bundles the context and parameters so callers can map many reads.
#[derive(Clone, Copy)]
pub struct Mapper<'a> {
    pub ctx: MapContext<'a>,
    pub params: MappingParams,
    pub strategy: Strategy,
}

impl<'a> Mapper<'a> {
    pub fn new(ctx: MapContext<'a>, params: MappingParams) -> Self {
        Mapper {
            ctx,
            params,
            strategy: Strategy::Greedy,
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    /// Maps one read; reads shorter than k come back unmapped with no anchor.
    pub fn map(&self, read: &Read) -> MappingResult {
        match map_read_with(read, &self.ctx, &self.params, self.strategy) {
            Ok(r) => r,
            Err(_) => MappingResult::unmapped(&read.id, FailureReason::NoAnchor),
        }
    }
}

/// Comparison of two optional costs where unmapped is worst.
pub fn compare_costs(a: Option<u32>, b: Option<u32>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}
