use super::{
    bounded_hamming, detect_on, DetectedOverlap, FailureReason, FailureTracker, Hit, MapContext, MappingParams,
    PathStep,
};
use crate::index::Side;

/// A unitig placed against one extremity of the read.
struct Extremity {
    step: PathStep,
    /// Offset of the read start inside the unitig (begin side only).
    offset: usize,
    cost: u32,
}

/// Greedy mapping of an oriented read on a branching path.
///
/// For each of the first `anchor_failures` overlaps, the read's left end is
/// aligned against unitigs ending with that overlap; for each of the last
/// `anchor_failures` overlaps, the right end against unitigs starting with it.
/// The gap between the two is then covered one junction at a time without
/// backtracking.
pub(super) fn map_on(seq: &[u8], ctx: &MapContext<'_>, params: &MappingParams) -> Result<Hit, FailureTracker> {
    let budget = params.mismatch_budget;
    let overlaps = detect_on(seq, ctx.anchors);
    let mut tracker = FailureTracker::default();
    let n = params.anchor_failures;

    for first in overlaps.iter().take(n) {
        let begin = match find_begin(seq, first, ctx, budget) {
            Ok(b) => b,
            Err(over) => {
                tracker.note(FailureReason::BeginNotFound, over);
                continue;
            }
        };
        for last in overlaps.iter().rev().take(n) {
            if last.position < first.position {
                tracker.note(FailureReason::EndNotFound, false);
                continue;
            }
            let end = match find_end(seq, last, ctx, budget - begin.cost) {
                Ok(e) => e,
                Err(over) => {
                    tracker.note(FailureReason::EndNotFound, over);
                    continue;
                }
            };
            let span = Span {
                from: first.position,
                from_step: begin.step,
                to: last.position,
                to_step: end.step,
            };
            match cover(seq, &overlaps, ctx, span, budget - begin.cost - end.cost) {
                Ok((middle, cost)) => {
                    let mut path = Vec::with_capacity(middle.len() + 2);
                    path.push(begin.step);
                    path.extend(middle);
                    path.push(end.step);
                    return Ok(Hit {
                        path,
                        start_offset: begin.offset,
                        mismatches: begin.cost + cost + end.cost,
                    });
                }
                Err(over) => tracker.note(FailureReason::CoverFailed, over),
            }
        }
    }
    Err(tracker)
}

/// Cheapest unitig ending with the overlap that also holds the read's start.
/// `Err(true)` when candidates fit but all exceed the budget.
fn find_begin(seq: &[u8], ov: &DetectedOverlap, ctx: &MapContext<'_>, budget: u32) -> Result<Extremity, bool> {
    let w = ctx.k() - 1;
    let p = ov.position;
    let mut best: Option<Extremity> = None;
    let mut fitted = false;
    for inc in ov.incidences.iter().filter(|i| i.side == Side::EndsWith) {
        let text = ctx.graph.oriented(inc.unitig_id, inc.orientation);
        let Some(offset) = text.len().checked_sub(w + p) else {
            continue;
        };
        fitted = true;
        let limit = best.as_ref().map_or(budget, |b| b.cost);
        if let Some(cost) = bounded_hamming(&seq[..p + w], &text[offset..], limit) {
            if best.as_ref().is_none_or(|b| cost < b.cost) {
                best = Some(Extremity {
                    step: PathStep {
                        unitig_id: inc.unitig_id,
                        orientation: inc.orientation,
                    },
                    offset,
                    cost,
                });
            }
        }
    }
    best.ok_or(fitted)
}

/// Cheapest unitig starting with the overlap that also holds the read's end.
/// The overlap bases themselves are not charged here.
fn find_end(seq: &[u8], ov: &DetectedOverlap, ctx: &MapContext<'_>, budget: u32) -> Result<Extremity, bool> {
    let w = ctx.k() - 1;
    let q = ov.position;
    let rest = seq.len() - q;
    let mut best: Option<Extremity> = None;
    let mut fitted = false;
    for inc in ov.incidences.iter().filter(|i| i.side == Side::StartsWith) {
        let text = ctx.graph.oriented(inc.unitig_id, inc.orientation);
        if text.len() < rest {
            continue;
        }
        fitted = true;
        let limit = best.as_ref().map_or(budget, |b| b.cost);
        if let Some(cost) = bounded_hamming(&seq[q + w..], &text[w..rest], limit) {
            if best.as_ref().is_none_or(|b| cost < b.cost) {
                best = Some(Extremity {
                    step: PathStep {
                        unitig_id: inc.unitig_id,
                        orientation: inc.orientation,
                    },
                    offset: 0,
                    cost,
                });
            }
        }
    }
    best.ok_or(fitted)
}

#[derive(Clone, Copy)]
struct Span {
    from: usize,
    from_step: PathStep,
    to: usize,
    to_step: PathStep,
}

/// Chains unitigs from the begin junction to the end junction, choosing one
/// candidate per junction. A candidate whose far end lands exactly on the next
/// detected overlap of the read is tried first and taken as soon as it fits the
/// budget; otherwise the cheapest candidate is taken.
fn cover(
    seq: &[u8],
    overlaps: &[DetectedOverlap],
    ctx: &MapContext<'_>,
    span: Span,
    budget: u32,
) -> Result<(Vec<PathStep>, u32), bool> {
    let graph = ctx.graph;
    let w = ctx.k() - 1;
    let target_key = graph.oriented_prefix(span.to_step.unitig_id, span.to_step.orientation);
    let mut p = span.from;
    let mut key = graph.oriented_suffix(span.from_step.unitig_id, span.from_step.orientation);
    let mut cost = 0u32;
    let mut steps = Vec::new();
    let mut next_idx = 0;

    loop {
        if p == span.to {
            return if key == target_key {
                Ok((steps, cost))
            } else {
                Err(false)
            };
        }
        let viable: Vec<(PathStep, usize)> = ctx
            .anchors
            .starting_with(&key)
            .into_iter()
            .filter_map(|(unitig_id, orientation)| {
                let q = p + graph.unitig_len(unitig_id) - w;
                (q <= span.to).then_some((PathStep { unitig_id, orientation }, q))
            })
            .collect();
        if viable.is_empty() {
            return Err(false);
        }
        while next_idx < overlaps.len() && overlaps[next_idx].position <= p {
            next_idx += 1;
        }
        let remaining = budget - cost;
        let segment = |step: &PathStep, q: usize| {
            let text = graph.oriented(step.unitig_id, step.orientation);
            (&seq[p + w..q + w], &text[w..])
        };

        let mut chosen: Option<(PathStep, usize, u32)> = None;
        if let Some(next) = overlaps.get(next_idx) {
            for &(step, q) in &viable {
                if q != next.position || graph.oriented_suffix(step.unitig_id, step.orientation) != next.key {
                    continue;
                }
                let (a, b) = segment(&step, q);
                if let Some(c) = bounded_hamming(a, b, remaining) {
                    chosen = Some((step, q, c));
                    break;
                }
            }
        }
        if chosen.is_none() {
            for &(step, q) in &viable {
                let limit = chosen.map_or(remaining, |c| c.2);
                let (a, b) = segment(&step, q);
                if let Some(c) = bounded_hamming(a, b, limit) {
                    if chosen.is_none_or(|best| c < best.2) {
                        chosen = Some((step, q, c));
                    }
                }
            }
        }
        let Some((step, q, c)) = chosen else {
            return Err(true);
        };
        steps.push(step);
        cost += c;
        p = q;
        key = graph.oriented_suffix(step.unitig_id, step.orientation);
    }
}
