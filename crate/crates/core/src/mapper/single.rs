use rustc_hash::FxHashSet;

use super::{bounded_hamming, FailureReason, FailureTracker, Hit, MapContext, MappingParams, PathStep};
use crate::graph::Orientation;
use crate::index::Occurrence;
use crate::seq::KmerIter;

/// Places an oriented read inside a single unitig.
///
/// Seeds are the read's N-free (k-1)-mers, left to right. Each seed proposes
/// the placements implied by its interior-index occurrences; a seed that
/// proposes nothing new is skipped. The first seed with a placement within
/// budget wins (cheapest of its placements); after `anchor_failures` seeds
/// whose new placements all failed, the search stops.
pub(super) fn map_on(seq: &[u8], ctx: &MapContext<'_>, params: &MappingParams) -> Result<Hit, FailureTracker> {
    let k = ctx.k();
    let len = seq.len();
    let budget = params.mismatch_budget;
    let mut tracker = FailureTracker::default();
    let mut tried: FxHashSet<(usize, Orientation, isize)> = FxHashSet::default();
    let mut occs: Vec<Occurrence> = Vec::new();
    let mut failures = 0;

    for (pos, mer) in KmerIter::new(seq, k - 1) {
        if failures >= params.anchor_failures {
            break;
        }
        ctx.interior.query_into(&mer, &mut occs);
        let mut fresh = false;
        let mut best: Option<(u32, PathStep, usize)> = None;
        let mut over_budget = false;
        let mut misplaced = false;
        for occ in &occs {
            let start = occ.offset as isize - pos as isize;
            let key = (occ.unitig_id, occ.orientation, start);
            if !tried.insert(key) {
                continue;
            }
            fresh = true;
            let text = ctx.graph.oriented(occ.unitig_id, occ.orientation);
            if start < 0 || start as usize + len > text.len() {
                misplaced = true;
                continue;
            }
            let start = start as usize;
            let limit = best.map_or(budget, |b| b.0);
            match bounded_hamming(seq, &text[start..start + len], limit) {
                Some(cost) if best.is_none_or(|b| cost < b.0) => {
                    best = Some((
                        cost,
                        PathStep {
                            unitig_id: occ.unitig_id,
                            orientation: occ.orientation,
                        },
                        start,
                    ))
                }
                Some(_) => {}
                None => over_budget = true,
            }
        }
        if let Some((mismatches, step, start_offset)) = best {
            return Ok(Hit {
                path: vec![step],
                start_offset,
                mismatches,
            });
        }
        if fresh {
            failures += 1;
            if misplaced {
                tracker.note(FailureReason::BeginNotFound, false);
            }
            if over_budget {
                tracker.note(FailureReason::BeginNotFound, true);
            }
        }
    }
    Err(tracker)
}
