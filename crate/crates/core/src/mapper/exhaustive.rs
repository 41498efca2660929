use super::{bounded_hamming, detect_on, FailureReason, FailureTracker, Hit, MapContext, MappingParams, PathStep};
use crate::index::Side;

pub(crate) struct ExhaustiveOutcome {
    /// Co-optimal hits, first-found first. Empty when unmapped.
    pub hits: Vec<Hit>,
    pub truncated: bool,
    pub failure: FailureTracker,
}

impl ExhaustiveOutcome {
    pub fn into_best(self) -> Result<Hit, FailureTracker> {
        self.hits.into_iter().next().ok_or(self.failure)
    }
}

struct Search<'s, 'c> {
    seq: &'s [u8],
    ctx: &'s MapContext<'c>,
    budget: u32,
    max_results: usize,
    expansion_budget: usize,
    expansions: usize,
    truncated: bool,
    best: Option<u32>,
    hits: Vec<Hit>,
    failure: FailureTracker,
    path: Vec<PathStep>,
    start_offset: usize,
}

impl Search<'_, '_> {
    /// Highest cost still worth exploring, or `None` if nothing can improve the result set.
    fn limit(&self) -> Option<u32> {
        match self.best {
            None => Some(self.budget),
            Some(b) if self.hits.len() < self.max_results => Some(b),
            Some(b) => b.checked_sub(1),
        }
    }

    fn record(&mut self, cost: u32) {
        let hit = Hit {
            path: self.path.clone(),
            start_offset: self.start_offset,
            mismatches: cost,
        };
        match self.best {
            Some(b) if cost > b => {}
            Some(b) if cost == b => {
                if self.hits.len() < self.max_results {
                    self.hits.push(hit);
                }
            }
            _ => {
                self.best = Some(cost);
                self.hits = vec![hit];
            }
        }
    }

    /// Tries every unitig starting with `key` placed at read position `p`.
    fn extend(&mut self, p: usize, key: crate::seq::Kmer, cost: u32) {
        let graph = self.ctx.graph;
        let w = self.ctx.k() - 1;
        let len = self.seq.len();
        let candidates = self.ctx.anchors.starting_with(&key);
        if candidates.is_empty() {
            self.failure.note(FailureReason::CoverFailed, false);
        }
        for (unitig_id, orientation) in candidates {
            if self.expansions >= self.expansion_budget {
                self.truncated = true;
                return;
            }
            self.expansions += 1;
            let Some(limit) = self.limit() else {
                return;
            };
            let text = graph.oriented(unitig_id, orientation);
            let end = len.min(p + text.len());
            let Some(c) = bounded_hamming(&self.seq[p + w..end], &text[w..end - p], limit.saturating_sub(cost)) else {
                self.failure.note(FailureReason::CoverFailed, true);
                continue;
            };
            if cost + c > limit {
                continue;
            }
            self.path.push(PathStep { unitig_id, orientation });
            if p + text.len() >= len {
                self.record(cost + c);
            } else {
                let next_key = graph.oriented_suffix(unitig_id, orientation);
                self.extend(p + text.len() - w, next_key, cost + c);
            }
            self.path.pop();
            if self.truncated {
                return;
            }
        }
    }
}

/// Branch-and-bound over all junction choices. Begin anchors are the same as
/// the greedy mapper's (first `anchor_failures` overlaps), but every begin
/// candidate within budget is explored, and no end anchor is required: the
/// search stops at whichever unitig covers the read's last base.
pub(super) fn map_on(
    seq: &[u8],
    ctx: &MapContext<'_>,
    params: &MappingParams,
    expansion_budget: usize,
    max_results: usize,
) -> ExhaustiveOutcome {
    let w = ctx.k() - 1;
    let overlaps = detect_on(seq, ctx.anchors);
    let mut s = Search {
        seq,
        ctx,
        budget: params.mismatch_budget,
        max_results,
        expansion_budget,
        expansions: 0,
        truncated: false,
        best: None,
        hits: Vec::new(),
        failure: FailureTracker::default(),
        path: Vec::new(),
        start_offset: 0,
    };
    'anchors: for ov in overlaps.iter().take(params.anchor_failures) {
        let p = ov.position;
        let mut any_begin = false;
        let mut fitted = false;
        for inc in ov.incidences.iter().filter(|i| i.side == Side::EndsWith) {
            let text = ctx.graph.oriented(inc.unitig_id, inc.orientation);
            let Some(offset) = text.len().checked_sub(w + p) else {
                continue;
            };
            fitted = true;
            let Some(limit) = s.limit() else {
                break 'anchors;
            };
            let Some(cost) = bounded_hamming(&seq[..p + w], &text[offset..], limit) else {
                continue;
            };
            any_begin = true;
            s.path.clear();
            s.path.push(PathStep {
                unitig_id: inc.unitig_id,
                orientation: inc.orientation,
            });
            s.start_offset = offset;
            s.extend(p, ov.key, cost);
            if s.truncated {
                break 'anchors;
            }
        }
        if !any_begin {
            s.failure.note(FailureReason::BeginNotFound, fitted);
        }
    }
    ExhaustiveOutcome {
        hits: s.hits,
        truncated: s.truncated,
        failure: s.failure,
    }
}
