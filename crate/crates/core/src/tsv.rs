//! Tab-separated mapping records and the per-regime summary.

use std::fmt::Write as _;

use crate::mapper::{MappingResult, Regime};

pub const HEADER: &str = "read_id\tstatus\tstrand\tpath\tstart_offset\tmismatches\tmismatch_positions\tregime\treason";

/// One record, without the trailing newline. Empty fields are written as `*`.
///
/// `status` is `mapped`, `unmapped`, or `mapped_walk` when the mapping's
/// expanded node sequence revisits a k-mer.
pub fn format_record(r: &MappingResult) -> String {
    let mut s = String::with_capacity(64);
    let status = match (r.is_mapped(), r.repeats_node) {
        (false, _) => "unmapped",
        (true, false) => "mapped",
        (true, true) => "mapped_walk",
    };
    let strand = r.strand.map_or('*', |s| s.symbol());
    write!(s, "{}\t{}\t{}\t", r.read_id, status, strand).unwrap();
    if r.path.is_empty() {
        s.push('*');
    } else {
        for (i, step) in r.path.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(s, "{step}").unwrap();
        }
    }
    if r.is_mapped() {
        write!(s, "\t{}\t{}\t", r.start_offset, r.mismatches).unwrap();
        if r.mismatch_positions.is_empty() {
            s.push('*');
        } else {
            for (i, p) in r.mismatch_positions.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{p}").unwrap();
            }
        }
    } else {
        s.push_str("\t*\t*\t*");
    }
    let reason = r.reason.map_or_else(|| "*".to_string(), |x| x.to_string());
    write!(s, "\t{}\t{}", r.regime.as_str(), reason).unwrap();
    s
}

/// Read counts per regime; every read lands in exactly one bucket.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RegimeSummary {
    pub single_unitig: u64,
    pub branching_path: u64,
    pub unmapped: u64,
}

impl RegimeSummary {
    pub fn add(&mut self, r: &MappingResult) {
        match r.regime {
            Regime::SingleUnitig => self.single_unitig += 1,
            Regime::BranchingPath => self.branching_path += 1,
            Regime::Unmapped => self.unmapped += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.single_unitig + self.branching_path + self.unmapped
    }

    fn pct(&self, n: u64) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            100.0 * n as f64 / self.total() as f64
        }
    }

    /// `key=value` line with the three regime percentages.
    pub fn format(&self) -> String {
        format!(
            "reads={}\tsingle_unitig_pct={:.2}\tbranching_path_pct={:.2}\tunmapped_pct={:.2}",
            self.total(),
            self.pct(self.single_unitig),
            self.pct(self.branching_path),
            self.pct(self.unmapped)
        )
    }
}
