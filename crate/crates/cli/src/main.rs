//! `dbgmap`: build a compacted de Bruijn graph, index it, map reads onto it,
//! and evaluate mapping accuracy on simulated reads.
//!
//! Exit codes: 0 success, 1 eval gate not met, 2 usage or I/O error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dbgmap::batch::{map_batch, with_threads};
use dbgmap::eval::{evaluate_on, random_genome, reference_graph, write_truth_tsv, EvalConfig, SimConfig};
use dbgmap::gfa::{write_gfa, write_path_line};
use dbgmap::index::{read_indexes, write_indexes};
use dbgmap::io::{open_maybe_gz, read_all, IdDeduplicator, SeqReader};
use dbgmap::tsv::{format_record, RegimeSummary, HEADER};
use dbgmap::{CompactedGraph, GraphIndex, MappingParams, StrandMode, MAX_K};

const CHUNK: usize = 50_000;

#[derive(Parser)]
#[command(
    name = "dbgmap",
    version,
    about = "Map reads on branching paths of a compacted de Bruijn graph"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count k-mers, keep solid ones and write the unitigs as FASTA
    Build(BuildArgs),
    /// Build the overlap and interior indexes of a unitig FASTA
    Index(IndexArgs),
    /// Map reads and write one TSV record per read, in input order
    Map(MapArgs),
    /// Simulate reads from a reference and report accuracy as CSV
    Eval(EvalArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// k-mer length
    #[arg(short = 'k', default_value_t = 31, value_parser = parse_k)]
    k: usize,
}

#[derive(Args)]
struct MapperArgs {
    /// Mismatch budget per read
    #[arg(short = 't', default_value_t = 2)]
    mismatches: u32,
    /// Anchors tried at each read end before giving up
    #[arg(short = 'n', default_value_t = 2)]
    anchor_failures: usize,
    #[arg(long, value_enum, default_value_t = StrandArg::Both)]
    strand: StrandArg,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl MapperArgs {
    fn params(&self) -> MappingParams {
        MappingParams {
            mismatch_budget: self.mismatches,
            anchor_failures: self.anchor_failures,
            strand_mode: match self.strand {
                StrandArg::Both => StrandMode::Both,
                StrandArg::Forward => StrandMode::ForwardOnly,
            },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrandArg {
    Both,
    Forward,
}

#[derive(Args)]
struct BuildArgs {
    /// Reads or reference, FASTA or FASTQ, optionally gzipped
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    /// Minimum k-mer count to keep
    #[arg(short = 'c', default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    min_count: u64,
    /// Unitig FASTA output
    #[arg(short = 'o', long, default_value = "unitigs.fa")]
    output: PathBuf,
    /// Also write the graph as GFA
    #[arg(long)]
    gfa: Option<PathBuf>,
    /// Also write the solid k-mer set
    #[arg(long)]
    solid_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct IndexArgs {
    /// Unitig FASTA written by `build`
    unitigs: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value = "unitigs.idx")]
    index_out: PathBuf,
    /// Only unitigs longer than this go into the interior index
    #[arg(long, default_value_t = 0)]
    interior_min_len: usize,
    /// Interior index sampling stride
    #[arg(long, default_value_t = 1)]
    interior_stride: usize,
}

#[derive(Args)]
struct MapArgs {
    /// Unitig FASTA written by `build`
    #[arg(short = 'g', long)]
    unitigs: PathBuf,
    /// Reads to map, FASTA or FASTQ, optionally gzipped
    reads: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    mapper: MapperArgs,
    /// Index written by `index`; built on the fly when absent
    #[arg(long)]
    index_in: Option<PathBuf>,
    /// TSV output (default: standard output)
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Also write the graph and one P line per mapped read as GFA
    #[arg(long)]
    gfa: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Reference FASTA; a random genome is used when absent
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Length of the random reference
    #[arg(long, default_value_t = 200_000)]
    genome_len: usize,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    mapper: MapperArgs,
    /// Substitution rates, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.001, 0.002, 0.005, 0.01, 0.02])]
    rates: Vec<f64>,
    /// Reads simulated per rate
    #[arg(long, default_value_t = 100_000)]
    reads: usize,
    #[arg(long, default_value_t = 100)]
    read_len: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also map with the exhaustive search and report the gap
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, default_value_t = 1_000_000)]
    expansion_budget: usize,
    /// CSV output (default: standard output)
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Write the simulated reads' origins and error positions for the first rate
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Gate: minimum recall (fraction) at every rate
    #[arg(long)]
    min_recall: Option<f64>,
    /// Gate: minimum distance-0 share (percent of mapped) at every rate
    #[arg(long)]
    min_d0: Option<f64>,
    /// Gate: maximum greedy suboptimal fraction at every rate
    #[arg(long)]
    max_subopt: Option<f64>,
}

fn parse_k(s: &str) -> Result<usize, String> {
    let k: usize = s.parse().map_err(|e| format!("{e}"))?;
    if (2..=MAX_K).contains(&k) {
        Ok(k)
    } else {
        Err(format!("k must be in 2..={MAX_K}"))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn build(args: &BuildArgs) -> Result<()> {
    let mut reads = Vec::new();
    for p in &args.inputs {
        reads.extend(read_all(p).with_context(|| format!("cannot read {}", p.display()))?);
    }
    if reads.iter().all(|r| r.seq.is_empty()) {
        bail!("no sequences");
    }
    let k = args.graph.k;
    let (solid, graph) = with_threads(args.threads, || dbgmap::graph::build_graph(&reads, k, args.min_count))??;
    let mut out = create(&args.output)?;
    graph.write_fasta(&mut out)?;
    out.flush()?;
    if let Some(p) = &args.gfa {
        let anchors = dbgmap::build_anchor_index(&graph);
        let mut g = create(p)?;
        write_gfa(&mut g, &graph, &anchors)?;
        g.flush()?;
    }
    if let Some(p) = &args.solid_out {
        let mut s = create(p)?;
        solid.write_to(&mut s)?;
        s.flush()?;
    }
    println!("solid_kmers={}", solid.len());
    println!("unitig_count={}", graph.len());
    println!("mean_len={:.2}", graph.mean_len());
    Ok(())
}

fn index(args: &IndexArgs) -> Result<()> {
    let graph = load_graph(&args.unitigs, args.graph.k)?;
    let gi = GraphIndex::with_interior(graph, args.interior_min_len, args.interior_stride)?;
    let mut out = create(&args.index_out)?;
    write_indexes(&mut out, &gi.anchors, &gi.interior)?;
    out.flush()?;
    let keys = gi.anchors.key_count();
    println!("anchor_keys={keys}");
    println!("anchor_entries={}", gi.anchors.entry_count());
    println!(
        "anchor_bytes_per_key={:.2}",
        if keys == 0 {
            0.0
        } else {
            gi.anchors.approx_bytes() as f64 / keys as f64
        }
    );
    println!("interior_entries={}", gi.interior.entry_count());
    println!("interior_bytes={}", gi.interior.approx_bytes());
    Ok(())
}

fn load_graph(path: &Path, k: usize) -> Result<CompactedGraph> {
    CompactedGraph::read_fasta(path, k).with_context(|| format!("cannot load unitigs from {}", path.display()))
}

fn map(args: &MapArgs) -> Result<()> {
    let k = args.graph.k;
    let graph = load_graph(&args.unitigs, k)?;
    let gi = match &args.index_in {
        Some(p) => {
            let mut f = io::BufReader::new(File::open(p).with_context(|| format!("cannot open {}", p.display()))?);
            let (anchors, interior) = read_indexes(&mut f).with_context(|| format!("cannot load {}", p.display()))?;
            if anchors.k() != k {
                bail!("index was built with k={}, not {k}", anchors.k());
            }
            GraphIndex {
                graph,
                anchors,
                interior,
            }
        }
        None => GraphIndex::new(graph)?,
    };
    let mapper = gi.mapper(args.mapper.params());
    let input = open_maybe_gz(&args.reads).with_context(|| format!("cannot open {}", args.reads.display()))?;
    let mut records = SeqReader::new(input);
    let mut out = output(args.output.as_deref())?;
    let mut gfa = match &args.gfa {
        Some(p) => {
            let mut g = create(p)?;
            write_gfa(&mut g, &gi.graph, &gi.anchors)?;
            Some(g)
        }
        None => None,
    };
    writeln!(out, "{HEADER}")?;
    let mut dedup = IdDeduplicator::default();
    let mut summary = RegimeSummary::default();
    let mut index = 0;
    let started = Instant::now();
    loop {
        let mut chunk = Vec::with_capacity(CHUNK);
        for rec in records.by_ref().take(CHUNK) {
            let mut r = rec.with_context(|| format!("cannot parse {}", args.reads.display()))?;
            dedup.fix(&mut r, index);
            index += 1;
            chunk.push(r);
        }
        if chunk.is_empty() {
            break;
        }
        let results = with_threads(args.mapper.threads, || map_batch(&chunk, &mapper))?;
        for r in &results {
            summary.add(r);
            writeln!(out, "{}", format_record(r))?;
            if let Some(g) = gfa.as_mut() {
                write_path_line(g, r, k)?;
            }
        }
        eprintln!("mapped {index} reads");
    }
    out.flush()?;
    if let Some(mut g) = gfa {
        g.flush()?;
    }
    let secs = started.elapsed().as_secs_f64();
    eprintln!("{}", summary.format());
    eprintln!(
        "reads_per_sec={:.1}",
        if secs > 0.0 { summary.total() as f64 / secs } else { 0.0 }
    );
    Ok(())
}

/// Returns whether every gate holds.
fn eval(args: &EvalArgs) -> Result<bool> {
    let k = args.graph.k;
    let reference = match &args.reference {
        Some(p) => {
            let recs = read_all(p).with_context(|| format!("cannot read {}", p.display()))?;
            let mut seq = Vec::new();
            for r in recs {
                seq.extend_from_slice(&r.seq);
            }
            if seq.is_empty() {
                bail!("no sequences");
            }
            if seq.contains(&b'N') {
                bail!("reference contains non-ACGT bases");
            }
            seq
        }
        None => random_genome(args.genome_len, args.seed),
    };
    let cfg = EvalConfig {
        k,
        error_rates: args.rates.clone(),
        reads_per_rate: args.reads,
        read_length: args.read_len,
        params: args.mapper.params(),
        seed: args.seed,
        compare_exhaustive: args.exhaustive,
        expansion_budget: args.expansion_budget,
    };
    if args.read_len < k {
        bail!("read length {} below k {k}", args.read_len);
    }
    let index = reference_graph(&reference, k)?;
    eprintln!("unitig_count={}", index.graph.len());
    let report = with_threads(args.mapper.threads, || evaluate_on(&index, &reference, &cfg))??;
    if let (Some(p), Some(&rate)) = (&args.truth, args.rates.first()) {
        let sims = dbgmap::eval::simulate_reads(&SimConfig {
            reference: &reference,
            read_length: args.read_len,
            read_count: args.reads,
            error_rate: rate,
            rng_seed: args.seed,
        })?;
        let mut t = create(p)?;
        write_truth_tsv(&mut t, &sims)?;
        t.flush()?;
    }
    let mut out = output(args.output.as_deref())?;
    out.write_all(report.to_csv().as_bytes())?;
    out.flush()?;

    let mut ok = true;
    for row in &report.rows {
        let mut gate = |pass: bool, what: String| {
            if !pass {
                eprintln!("gate failed at rate {}: {what}", row.error_rate);
                ok = false;
            }
        };
        if let Some(m) = args.min_recall {
            gate(row.recall() >= m, format!("recall {:.4} < {m}", row.recall()));
        }
        if let Some(m) = args.min_d0 {
            let d0 = row.distance_pct()[0];
            gate(d0 >= m, format!("d0 {d0:.2}% < {m}%"));
        }
        if let Some(m) = args.max_subopt {
            let s = row.suboptimal_fraction();
            gate(s <= m, format!("suboptimal fraction {s:.4} > {m}"));
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Build(a) => build(a).map(|_| true),
        Command::Index(a) => index(a).map(|_| true),
        Command::Map(a) => map(a).map(|_| true),
        Command::Eval(a) => eval(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
