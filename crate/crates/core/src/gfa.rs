//! GFA1 export: one `S` line per unitig, one `L` line per (k-1)-overlap edge,
//! and optional `P` lines for mapped reads.

use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::{CompactedGraph, Orientation};
use crate::index::{AnchorIndex, Side};
use crate::mapper::MappingResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub from: usize,
    pub from_orientation: Orientation,
    pub to: usize,
    pub to_orientation: Orientation,
}

impl Link {
    /// The same edge read on the opposite strand.
    pub fn mirror(&self) -> Link {
        Link {
            from: self.to,
            from_orientation: self.to_orientation.flip(),
            to: self.from,
            to_orientation: self.from_orientation.flip(),
        }
    }

    fn normalized(self) -> Link {
        self.min(self.mirror())
    }
}

/// Every edge of the compacted graph, one representative per strand pair, sorted.
/// Derived from the anchor index: an edge joins a unitig ending with an overlap
/// to a unitig starting with it.
pub fn links(anchors: &AnchorIndex) -> Vec<Link> {
    let mut out = Vec::new();
    for key in anchors.keys() {
        let incs = anchors.query_unchecked(&key);
        let ends = incs.iter().filter(|i| i.side == Side::EndsWith);
        for e in ends {
            for s in incs.iter().filter(|i| i.side == Side::StartsWith) {
                out.push(
                    Link {
                        from: e.unitig_id,
                        from_orientation: e.orientation,
                        to: s.unitig_id,
                        to_orientation: s.orientation,
                    }
                    .normalized(),
                );
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

pub fn write_gfa<W: Write>(out: &mut W, graph: &CompactedGraph, anchors: &AnchorIndex) -> Result<()> {
    let overlap = graph.k() - 1;
    writeln!(out, "H\tVN:Z:1.0")?;
    for u in graph.unitigs() {
        out.write_all(format!("S\tu{}\t", u.id).as_bytes())?;
        out.write_all(&u.seq)?;
        out.write_all(b"\n")?;
    }
    for l in links(anchors) {
        writeln!(
            out,
            "L\tu{}\t{}\tu{}\t{}\t{}M",
            l.from,
            l.from_orientation.symbol(),
            l.to,
            l.to_orientation.symbol(),
            overlap
        )?;
    }
    Ok(())
}

/// A `P` line for a mapped read; unmapped reads produce nothing.
pub fn write_path_line<W: Write>(out: &mut W, r: &MappingResult, k: usize) -> Result<()> {
    if !r.is_mapped() {
        return Ok(());
    }
    let segs: Vec<String> = r.path.iter().map(|s| s.to_string()).collect();
    let overlaps = if segs.len() > 1 {
        vec![format!("{}M", k - 1); segs.len() - 1].join(",")
    } else {
        "*".to_string()
    };
    writeln!(out, "P\t{}\t{}\t{}", r.read_id, segs.join(","), overlaps)?;
    Ok(())
}

fn parse_orientation(s: &str) -> Result<Orientation> {
    match s {
        "+" => Ok(Orientation::Forward),
        "-" => Ok(Orientation::Reverse),
        _ => Err(Error::Format(format!("bad orientation {s:?}"))),
    }
}

fn parse_segment(s: &str) -> Result<usize> {
    s.strip_prefix('u')
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| Error::Format(format!("bad segment name {s:?}")))
}

/// Reads back the `L` lines of a GFA produced by [`write_gfa`].
pub fn parse_links(text: &str) -> Result<Vec<Link>> {
    let mut out = Vec::new();
    for line in text.lines().filter(|l| l.starts_with("L\t")) {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() < 6 {
            return Err(Error::Format(format!("short L line: {line}")));
        }
        out.push(Link {
            from: parse_segment(f[1])?,
            from_orientation: parse_orientation(f[2])?,
            to: parse_segment(f[3])?,
            to_orientation: parse_orientation(f[4])?,
        });
    }
    Ok(out)
}
