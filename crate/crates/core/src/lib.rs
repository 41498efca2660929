//! Compacted de Bruijn graph construction and Hamming-distance read mapping
//! on branching unitig paths.
//!
//! The pipeline is: count canonical k-mers ([`census`]), keep the solid ones,
//! merge non-branching paths into unitigs ([`graph`]), index unitig end
//! overlaps ([`index`]), then map reads either inside one unitig or greedily
//! across junctions ([`mapper`]). [`eval`] simulates reads from a reference
//! and scores mappings against the truth.

pub mod audit;
pub mod batch;
pub mod census;
pub mod error;
pub mod eval;
pub mod gfa;
pub mod graph;
pub mod index;
pub mod io;
pub mod mapper;
pub mod seq;
pub mod tsv;

pub use census::{count_kmers, solid_set, KmerCensus, SolidKmerSet};
pub use error::{Error, Result};
pub use graph::{compact, enumerate_paths, walk_sequence, CompactedGraph, DbgWalk, Orientation, Unitig};
pub use index::{build_anchor_index, build_interior_index, AnchorIndex, Incidence, InteriorIndex, Side};
pub use mapper::{
    detect_read_overlaps, map_branching, map_exhaustive, map_read, map_single_unitig, FailureReason, MapContext,
    Mapper, MappingParams, MappingResult, PathStep, Regime, Strand, StrandMode,
};
pub use seq::{enumerate_kmers, reverse_complement, Base, Kmer, Read, MAX_K};

/// A graph together with both of its indexes, ready for mapping.
#[derive(Clone, Debug)]
pub struct GraphIndex {
    pub graph: CompactedGraph,
    pub anchors: AnchorIndex,
    pub interior: InteriorIndex,
}

impl GraphIndex {
    /// Indexes every position of every unitig.
    pub fn new(graph: CompactedGraph) -> Result<Self> {
        Self::with_interior(graph, 0, 1)
    }

    pub fn with_interior(graph: CompactedGraph, min_unitig_len: usize, stride: usize) -> Result<Self> {
        let anchors = build_anchor_index(&graph);
        let interior = build_interior_index(&graph, min_unitig_len, stride)?;
        Ok(GraphIndex {
            graph,
            anchors,
            interior,
        })
    }

    /// Graph of every k-mer of the given sequences (coverage threshold 1).
    pub fn from_sequences<'a>(k: usize, seqs: impl IntoIterator<Item = &'a [u8]>) -> Result<Self> {
        let solid = SolidKmerSet::from_sequences(k, seqs)?;
        Self::new(compact(&solid)?)
    }

    pub fn ctx(&self) -> MapContext<'_> {
        MapContext::new(&self.graph, &self.anchors, &self.interior)
    }

    pub fn mapper(&self, params: MappingParams) -> Mapper<'_> {
        Mapper::new(self.ctx(), params)
    }
}
