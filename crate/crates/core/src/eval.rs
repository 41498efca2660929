//! Substitution-error read simulation and accuracy measurement against the
//! simulated truth: recall, distance to optimum, and greedy vs exhaustive gap.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::batch::map_batch;
use crate::error::{Error, Result};
use crate::mapper::{compare_costs, MappingParams, MappingResult, Strand, Strategy};
use crate::seq::{code_of, reverse_complement, Read};
use crate::tsv::RegimeSummary;
use crate::GraphIndex;

const ERROR_STREAM_SALT: u64 = 0x5DEE_CE66_D1CE_4E5B;

/// Uniform random ACGT sequence.
pub fn random_genome(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect()
}

#[derive(Clone, Debug)]
pub struct SimConfig<'a> {
    pub reference: &'a [u8],
    pub read_length: usize,
    pub read_count: usize,
    pub error_rate: f64,
    pub rng_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulatedRead {
    pub read: Read,
    /// 0-based start of the source window on the reference forward strand.
    pub origin: usize,
    pub strand: Strand,
    /// Substituted positions in read coordinates, ascending.
    pub error_positions: Vec<usize>,
}

/// Draws reads uniformly from the reference (both strands, never overlapping
/// its ends) and substitutes each base with probability `error_rate`.
///
/// Origins depend only on the seed, and each read's error draws come from its
/// own stream, so raising the error rate under the same seed only adds errors.
pub fn simulate_reads(cfg: &SimConfig<'_>) -> Result<Vec<SimulatedRead>> {
    if !(0.0..1.0).contains(&cfg.error_rate) {
        return Err(Error::Config(format!(
            "error rate must be in [0, 1), got {}",
            cfg.error_rate
        )));
    }
    if cfg.read_length == 0 || cfg.reference.len() < cfg.read_length {
        return Err(Error::Config(format!(
            "reference length {} shorter than read length {}",
            cfg.reference.len(),
            cfg.read_length
        )));
    }
    if let Some(&c) = cfg.reference.iter().find(|&&c| code_of(c).is_none()) {
        return Err(Error::NonAcgt(c as char));
    }
    let mut origin_rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let last = cfg.reference.len() - cfg.read_length;
    let mut out = Vec::with_capacity(cfg.read_count);
    for i in 0..cfg.read_count {
        let origin = origin_rng.gen_range(0..=last);
        let strand = if origin_rng.gen_bool(0.5) {
            Strand::Forward
        } else {
            Strand::Reverse
        };
        let window = &cfg.reference[origin..origin + cfg.read_length];
        let mut seq = match strand {
            Strand::Forward => window.to_vec(),
            Strand::Reverse => reverse_complement(window)?,
        };
        let mut err_rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ ERROR_STREAM_SALT);
        err_rng.set_stream(i as u64);
        let mut error_positions = Vec::new();
        for (pos, base) in seq.iter_mut().enumerate() {
            let u: f64 = err_rng.gen();
            let shift: u8 = err_rng.gen_range(1..4);
            if u < cfg.error_rate {
                let code = code_of(*base).unwrap();
                *base = b"ACGT"[((code + shift) % 4) as usize];
                error_positions.push(pos);
            }
        }
        out.push(SimulatedRead {
            read: Read::new(format!("sim{i}"), &seq),
            origin,
            strand,
            error_positions,
        });
    }
    Ok(out)
}

/// Mismatches of a mapping that fall on error-free read positions; `None` when unmapped.
pub fn distance_to_optimum(result: &MappingResult, truth: &SimulatedRead) -> Option<u32> {
    if !result.is_mapped() {
        return None;
    }
    Some(
        result
            .mismatch_positions
            .iter()
            .filter(|p| truth.error_positions.binary_search(p).is_err())
            .count() as u32,
    )
}

pub fn write_truth_tsv<W: Write>(out: &mut W, reads: &[SimulatedRead]) -> Result<()> {
    writeln!(out, "read_id\torigin\tstrand\terror_positions")?;
    for r in reads {
        let errs = if r.error_positions.is_empty() {
            "*".to_string()
        } else {
            r.error_positions
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        writeln!(out, "{}\t{}\t{}\t{}", r.read.id, r.origin, r.strand.symbol(), errs)?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct EvalConfig {
    pub k: usize,
    pub error_rates: Vec<f64>,
    pub reads_per_rate: usize,
    pub read_length: usize,
    pub params: MappingParams,
    pub seed: u64,
    /// Also map every read with the exhaustive search and compare.
    pub compare_exhaustive: bool,
    pub expansion_budget: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k: 31,
            error_rates: vec![0.0, 0.001, 0.002, 0.005, 0.01, 0.02],
            reads_per_rate: 100_000,
            read_length: 100,
            params: MappingParams::default(),
            seed: 1,
            compare_exhaustive: true,
            expansion_budget: 100_000,
        }
    }
}

/// Results for one simulated error rate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RateRow {
    pub error_rate: f64,
    pub simulated: u64,
    pub mapped: u64,
    /// Mapped reads by distance to optimum: 0, 1, 2, 3, >= 4.
    pub distance_histogram: [u64; 5],
    pub regimes: RegimeSummary,
    /// Reads mapped by the exhaustive pipeline but not the greedy one.
    pub exhaustive_only: u64,
    /// Reads mapped by both where the exhaustive cost is strictly lower.
    pub exhaustive_better: u64,
    /// Reads where the greedy cost is strictly lower (should never happen).
    pub dominance_violations: u64,
    pub exhaustive_mapped: u64,
    pub exhaustive_truncated: u64,
    pub reads_per_sec: f64,
}

impl RateRow {
    pub fn recall(&self) -> f64 {
        ratio(self.mapped, self.simulated)
    }

    /// Share of mapped reads at each distance, in percent.
    pub fn distance_pct(&self) -> [f64; 5] {
        self.distance_histogram.map(|n| 100.0 * ratio(n, self.mapped))
    }

    /// Exhaustive strictly beats greedy (including greedy unmapped), over reads
    /// the exhaustive pipeline maps.
    pub fn suboptimal_fraction(&self) -> f64 {
        ratio(self.exhaustive_only + self.exhaustive_better, self.exhaustive_mapped)
    }

    /// Same count as [`Self::suboptimal_fraction`] over all simulated reads.
    pub fn gap_over_simulated(&self) -> f64 {
        ratio(self.exhaustive_only + self.exhaustive_better, self.simulated)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<RateRow>,
}

pub const CSV_HEADER: &str = "error_rate,recall,d0,d1,d2,d3,d4plus,subopt_frac,reads_per_sec";

impl EvalReport {
    /// Recall as a fraction, distances as percentages of mapped reads.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{CSV_HEADER}").unwrap();
        for r in &self.rows {
            let d = r.distance_pct();
            writeln!(
                s,
                "{},{:.6},{:.4},{:.4},{:.4},{:.4},{:.4},{:.6},{:.1}",
                r.error_rate,
                r.recall(),
                d[0],
                d[1],
                d[2],
                d[3],
                d[4],
                r.suboptimal_fraction(),
                r.reads_per_sec
            )
            .unwrap();
        }
        s
    }
}

/// Builds the coverage-1 graph of the reference.
pub fn reference_graph(reference: &[u8], k: usize) -> Result<GraphIndex> {
    GraphIndex::from_sequences(k, [reference])
}

/// Simulates reads at each error rate, maps them, and scores against the truth.
pub fn run_accuracy_table(reference: &[u8], cfg: &EvalConfig) -> Result<EvalReport> {
    if cfg.error_rates.is_empty() {
        return Ok(EvalReport::default());
    }
    if cfg.read_length < cfg.k {
        return Err(Error::Config(format!(
            "read length {} below k {}",
            cfg.read_length, cfg.k
        )));
    }
    let index = reference_graph(reference, cfg.k)?;
    evaluate_on(&index, reference, cfg)
}

/// Like [`run_accuracy_table`] on an already built graph.
pub fn evaluate_on(index: &GraphIndex, reference: &[u8], cfg: &EvalConfig) -> Result<EvalReport> {
    let mut rows = Vec::with_capacity(cfg.error_rates.len());
    for &rate in &cfg.error_rates {
        let sims = simulate_reads(&SimConfig {
            reference,
            read_length: cfg.read_length,
            read_count: cfg.reads_per_rate,
            error_rate: rate,
            rng_seed: cfg.seed,
        })?;
        let reads: Vec<Read> = sims.iter().map(|s| s.read.clone()).collect();
        let greedy = index.mapper(cfg.params);
        let t0 = Instant::now();
        let results = map_batch(&reads, &greedy);
        let secs = t0.elapsed().as_secs_f64();

        let mut row = RateRow {
            error_rate: rate,
            simulated: sims.len() as u64,
            reads_per_sec: if secs > 0.0 { sims.len() as f64 / secs } else { 0.0 },
            ..RateRow::default()
        };
        for (sim, res) in sims.iter().zip(&results) {
            row.regimes.add(res);
            if let Some(d) = distance_to_optimum(res, sim) {
                row.mapped += 1;
                row.distance_histogram[(d as usize).min(4)] += 1;
            }
        }

        if cfg.compare_exhaustive {
            let exhaustive = greedy.with_strategy(Strategy::Exhaustive {
                expansion_budget: cfg.expansion_budget,
            });
            let ex_results = map_batch(&reads, &exhaustive);
            for (g, e) in results.iter().zip(&ex_results) {
                row.exhaustive_mapped += e.is_mapped() as u64;
                row.exhaustive_truncated += e.truncated as u64;
                match (g.cost(), e.cost()) {
                    (None, Some(_)) => row.exhaustive_only += 1,
                    (Some(gc), Some(ec)) if ec < gc => row.exhaustive_better += 1,
                    _ => {}
                }
                if compare_costs(g.cost(), e.cost()).is_lt() {
                    row.dominance_violations += 1;
                }
            }
        }
        rows.push(row);
    }
    Ok(EvalReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapper::{FailureReason, Regime};

    fn sim(reference: &[u8], rate: f64, n: usize, seed: u64) -> Vec<SimulatedRead> {
        simulate_reads(&SimConfig {
            reference,
            read_length: 50,
            read_count: n,
            error_rate: rate,
            rng_seed: seed,
        })
        .unwrap()
    }

    #[test]
    fn error_free_reads_are_substrings() {
        let g = random_genome(2_000, 3);
        for s in sim(&g, 0.0, 200, 9) {
            assert!(s.error_positions.is_empty());
            let window = &g[s.origin..s.origin + 50];
            let expect = match s.strand {
                Strand::Forward => window.to_vec(),
                Strand::Reverse => reverse_complement(window).unwrap(),
            };
            assert_eq!(s.read.seq, expect);
        }
    }

    #[test]
    fn simulation_is_deterministic_and_nested() {
        let g = random_genome(5_000, 1);
        assert_eq!(sim(&g, 0.01, 100, 4), sim(&g, 0.01, 100, 4));
        let lo = sim(&g, 0.005, 300, 4);
        let hi = sim(&g, 0.02, 300, 4);
        for (a, b) in lo.iter().zip(&hi) {
            assert_eq!(a.origin, b.origin);
            assert!(a.error_positions.iter().all(|p| b.error_positions.contains(p)));
        }
        let total: usize = hi.iter().map(|s| s.error_positions.len()).sum();
        // 300 reads * 50 bases * 2%
        assert!((150..=450).contains(&total), "{total}");
    }

    #[test]
    fn errors_always_change_the_base() {
        let g = random_genome(3_000, 8);
        let clean = sim(&g, 0.0, 100, 5);
        let noisy = sim(&g, 0.3, 100, 5);
        for (c, n) in clean.iter().zip(&noisy) {
            let diff: Vec<usize> = (0..50).filter(|&i| c.read.seq[i] != n.read.seq[i]).collect();
            assert_eq!(diff, n.error_positions);
        }
    }

    #[test]
    fn config_validation() {
        let g = random_genome(100, 1);
        let bad_rate = SimConfig {
            reference: &g,
            read_length: 50,
            read_count: 1,
            error_rate: 1.0,
            rng_seed: 0,
        };
        assert!(simulate_reads(&bad_rate).is_err());
        let too_long = SimConfig {
            read_length: 101,
            error_rate: 0.0,
            ..bad_rate.clone()
        };
        assert!(simulate_reads(&too_long).is_err());
    }

    fn mapped_with(positions: Vec<usize>) -> MappingResult {
        let mut r = MappingResult::unmapped("x", FailureReason::NoAnchor);
        r.regime = Regime::SingleUnitig;
        r.reason = None;
        r.mismatches = positions.len() as u32;
        r.mismatch_positions = positions;
        r
    }

    #[test]
    fn distance_examples() {
        let truth = |errs: Vec<usize>| SimulatedRead {
            read: Read::new("x", b"ACGT"),
            origin: 0,
            strand: Strand::Forward,
            error_positions: errs,
        };
        assert_eq!(distance_to_optimum(&mapped_with(vec![]), &truth(vec![])), Some(0));
        assert_eq!(
            distance_to_optimum(&mapped_with(vec![3, 17]), &truth(vec![3, 17])),
            Some(0)
        );
        assert_eq!(distance_to_optimum(&mapped_with(vec![5]), &truth(vec![])), Some(1));
        let un = MappingResult::unmapped("x", FailureReason::NoAnchor);
        assert_eq!(distance_to_optimum(&un, &truth(vec![])), None);
    }

    #[test]
    fn small_table_rows() {
        let g = random_genome(20_000, 11);
        let cfg = EvalConfig {
            k: 21,
            error_rates: vec![0.0, 0.01],
            reads_per_rate: 2_000,
            read_length: 60,
            seed: 2,
            ..EvalConfig::default()
        };
        let rep = run_accuracy_table(&g, &cfg).unwrap();
        assert_eq!(rep.rows.len(), 2);
        let r0 = &rep.rows[0];
        assert_eq!(r0.mapped, r0.simulated);
        assert_eq!(r0.distance_histogram[0], r0.simulated);
        assert_eq!(r0.dominance_violations, 0);
        let csv = rep.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("0,1.000000,100.0000,0.0000"));

        let empty = run_accuracy_table(
            &g,
            &EvalConfig {
                error_rates: vec![],
                ..cfg
            },
        )
        .unwrap();
        assert!(empty.rows.is_empty());
    }
}
