//! Independent re-derivation of a mapping from the graph, used to check that
//! what a mapper reports is what the graph actually spells.

use crate::graph::{CompactedGraph, Orientation};
use crate::index::{AnchorIndex, Incidence, Side};
use crate::mapper::{MappingResult, Regime, Strand};
use crate::seq::{reverse_complement, reverse_complement_lenient, Kmer, Read};

/// Checks a result against the graph:
/// - consecutive path unitigs share an exact (k-1) overlap listed in the anchor index;
/// - the read (on the reported strand) laid at `start_offset` along the
///   concatenated path fits inside it and every path unitig contributes at least one base;
/// - mismatch count and positions equal a fresh comparison;
/// - the cost is within `budget`.
pub fn verify_mapping(
    read: &Read,
    result: &MappingResult,
    graph: &CompactedGraph,
    anchors: &AnchorIndex,
    budget: u32,
) -> Result<(), String> {
    if !result.is_mapped() {
        return if result.path.is_empty() && result.strand.is_none() {
            Ok(())
        } else {
            Err("unmapped result carries a path".into())
        };
    }
    let k = graph.k();
    let w = k - 1;
    if result.path.is_empty() {
        return Err("mapped result without path".into());
    }
    match (result.regime, result.path.len()) {
        (Regime::SingleUnitig, 1) | (Regime::BranchingPath, 2..) => {}
        (reg, n) => return Err(format!("{reg:?} with {n} path steps")),
    }

    let texts: Vec<Vec<u8>> = result
        .path
        .iter()
        .map(|s| {
            let fwd = graph.unitigs()[s.unitig_id].seq.clone();
            match s.orientation {
                Orientation::Forward => fwd,
                Orientation::Reverse => reverse_complement(&fwd).unwrap(),
            }
        })
        .collect();

    for (i, pair) in texts.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        let ov = &a[a.len() - w..];
        if ov != &b[..w] {
            return Err(format!("steps {i} and {} do not overlap", i + 1));
        }
        let key = Kmer::from_bytes(ov).map_err(|e| e.to_string())?;
        let incs = anchors.query(&key).map_err(|e| e.to_string())?;
        let want_end = Incidence {
            unitig_id: result.path[i].unitig_id,
            orientation: result.path[i].orientation,
            side: Side::EndsWith,
        };
        let want_start = Incidence {
            unitig_id: result.path[i + 1].unitig_id,
            orientation: result.path[i + 1].orientation,
            side: Side::StartsWith,
        };
        if !incs.contains(&want_end) || !incs.contains(&want_start) {
            return Err(format!("junction {i} missing from anchor index"));
        }
    }

    let mut spelled = texts[0].clone();
    for t in &texts[1..] {
        spelled.extend_from_slice(&t[w..]);
    }
    let len = read.len();
    let start = result.start_offset;
    if start + len > spelled.len() {
        return Err("read runs past the end of the path".into());
    }
    if result.path.len() > 1 {
        if start + w >= texts[0].len() {
            return Err("first unitig contributes no read base".into());
        }
        let last_start = spelled.len() - texts.last().unwrap().len();
        if start + len <= last_start + w {
            return Err("last unitig contributes no read base".into());
        }
    }
    let oriented = match result.strand {
        Some(Strand::Forward) => read.seq.clone(),
        Some(Strand::Reverse) => reverse_complement_lenient(&read.seq),
        None => return Err("mapped result without strand".into()),
    };
    let window = &spelled[start..start + len];
    let mut positions: Vec<usize> = (0..len)
        .filter(|&i| window[i] != oriented[i] || oriented[i] == b'N')
        .map(|i| {
            if result.strand == Some(Strand::Reverse) {
                len - 1 - i
            } else {
                i
            }
        })
        .collect();
    positions.sort_unstable();
    if positions.len() as u32 != result.mismatches {
        return Err(format!(
            "reported {} mismatches, graph spells {}",
            result.mismatches,
            positions.len()
        ));
    }
    if positions != result.mismatch_positions {
        return Err("mismatch positions differ".into());
    }
    if result.mismatches > budget {
        return Err(format!("cost {} over budget {budget}", result.mismatches));
    }
    Ok(())
}
