//! Byte-string oracles shared by the integration tests and the acceptance
//! suite. Nothing here uses the crate's packed k-mers.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use dbgmap::graph::PathEnumeration;
use dbgmap::{
    enumerate_paths, AnchorIndex, CompactedGraph, GraphIndex, Kmer, MappingResult, Read, Regime, Side, SolidKmerSet,
    Strand,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rc(s: &[u8]) -> Vec<u8> {
    s.iter()
        .rev()
        .map(|&c| match c {
            b'A' => b'T',
            b'C' => b'G',
            b'G' => b'C',
            b'T' => b'A',
            _ => b'N',
        })
        .collect()
}

pub fn canonical(s: &[u8]) -> Vec<u8> {
    let r = rc(s);
    if r.as_slice() < s {
        r
    } else {
        s.to_vec()
    }
}

pub fn genome(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| b"ACGT"[rng.gen_range(0..4)]).collect()
}

pub fn hamming(a: &[u8], b: &[u8]) -> u32 {
    a.iter().zip(b).filter(|(x, y)| x != y || **x == b'N').count() as u32
}

/// Canonical k-mers of the given sequences.
pub fn canonical_spectrum<'a>(seqs: impl IntoIterator<Item = &'a [u8]>, k: usize) -> HashSet<Vec<u8>> {
    seqs.into_iter().flat_map(|s| s.windows(k).map(canonical)).collect()
}

/// Every k-mer of the set on both strands.
pub fn both_strands(canon: &HashSet<Vec<u8>>) -> HashSet<Vec<u8>> {
    canon.iter().flat_map(|c| [c.clone(), rc(c)]).collect()
}

/// Unitig k-mers cover the set, each exactly once.
pub fn check_spectrum(graph: &CompactedGraph, spectrum: &HashSet<Vec<u8>>) -> Result<(), String> {
    let k = graph.k();
    let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
    for u in graph.unitigs() {
        if u.seq.len() < k {
            return Err(format!("unitig {} shorter than k", u.id));
        }
        for w in u.seq.windows(k) {
            *seen.entry(canonical(w)).or_default() += 1;
        }
    }
    if let Some((m, n)) = seen.iter().find(|(_, &n)| n != 1) {
        return Err(format!("{} covered {n} times", String::from_utf8_lossy(m)));
    }
    let got: HashSet<Vec<u8>> = seen.into_keys().collect();
    if &got != spectrum {
        return Err(format!(
            "spectrum differs: {} missing, {} extra",
            spectrum.difference(&got).count(),
            got.difference(spectrum).count()
        ));
    }
    Ok(())
}

fn out_neighbors(x: &[u8], oriented: &HashSet<Vec<u8>>) -> Vec<Vec<u8>> {
    b"ACGT"
        .iter()
        .map(|&b| [&x[1..], &[b]].concat())
        .filter(|y| oriented.contains(y))
        .collect()
}

fn in_degree(y: &[u8], oriented: &HashSet<Vec<u8>>) -> usize {
    b"ACGT"
        .iter()
        .filter(|&&b| oriented.contains(&[&[b], &y[..y.len() - 1]].concat()))
        .count()
}

/// Inside a unitig every edge is the only one out of its source and into its
/// target; at both ends no such edge leaves the unitig.
pub fn check_maximal(graph: &CompactedGraph, oriented: &HashSet<Vec<u8>>) -> Result<(), String> {
    let k = graph.k();
    for u in graph.unitigs() {
        let own: HashSet<Vec<u8>> = u.seq.windows(k).map(canonical).collect();
        for w in u.seq.windows(k + 1) {
            let (x, y) = (&w[..k], &w[1..]);
            if out_neighbors(x, oriented).len() != 1 || in_degree(y, oriented) != 1 {
                return Err(format!("unitig {} contains a branching edge", u.id));
            }
        }
        for text in [u.seq.clone(), rc(&u.seq)] {
            let x = &text[text.len() - k..];
            let succ = out_neighbors(x, oriented);
            if succ.len() == 1 && in_degree(&succ[0], oriented) == 1 && !own.contains(&canonical(&succ[0])) {
                return Err(format!("unitig {} could be extended", u.id));
            }
        }
    }
    Ok(())
}

/// Distinct unitigs starting (ending) with a non-palindromic anchor key, as
/// written, stay within 4. A palindromic k-mer unitig (even k) starts with the
/// key in both orientations but is one unitig.
pub fn check_sharing(anchors: &AnchorIndex) -> Result<(usize, usize), String> {
    let mut worst = (0, 0);
    for key in anchors.keys() {
        if key.is_palindrome() {
            continue;
        }
        for word in [key, key.reverse_complement()] {
            let incs = anchors.query(&word).map_err(|e| e.to_string())?;
            let distinct = |side: Side| {
                incs.iter()
                    .filter(|i| i.side == side)
                    .map(|i| i.unitig_id)
                    .collect::<HashSet<_>>()
                    .len()
            };
            let (starts, ends) = (distinct(Side::StartsWith), distinct(Side::EndsWith));
            worst = (worst.0.max(starts), worst.1.max(ends));
            if starts > 4 || ends > 4 {
                return Err(format!("key {word} shared by {starts} starts, {ends} ends"));
            }
        }
    }
    Ok(worst)
}

/// Text of the mapped strand's window, rebuilt from the unitig sequences.
pub fn spelled_window(graph: &CompactedGraph, r: &MappingResult, len: usize) -> Vec<u8> {
    let w = graph.k() - 1;
    let mut text = Vec::new();
    for (i, s) in r.path.iter().enumerate() {
        let u = &graph.unitigs()[s.unitig_id].seq;
        let t = match s.orientation {
            dbgmap::Orientation::Forward => u.clone(),
            dbgmap::Orientation::Reverse => rc(u),
        };
        text.extend_from_slice(if i == 0 { &t } else { &t[w..] });
    }
    text[r.start_offset..r.start_offset + len].to_vec()
}

pub struct Correspondence {
    pub branching: bool,
    pub repeats: bool,
    pub enumerated: usize,
}

/// A branching mapping expands to |q|-k+1 solid nodes whose text is at the
/// reported Hamming cost; a repeat-free expansion is confirmed piecewise
/// against `enumerate_paths`, and repeats match the result's flag.
pub fn check_correspondence(
    gi: &GraphIndex,
    solid: &SolidKmerSet,
    read: &Read,
    r: &MappingResult,
    enumeration_budget: usize,
) -> Result<Correspondence, String> {
    let k = gi.graph.k();
    let len = read.seq.len();
    if r.regime != Regime::BranchingPath {
        return Ok(Correspondence {
            branching: false,
            repeats: false,
            enumerated: 0,
        });
    }
    let window = spelled_window(&gi.graph, r, len);
    let nodes: Vec<&[u8]> = window.windows(k).collect();
    if nodes.len() != len - k + 1 {
        return Err("node count".into());
    }
    for n in &nodes {
        if !solid.contains(&Kmer::from_bytes(n).unwrap()) {
            return Err(format!("node {} not solid", String::from_utf8_lossy(n)));
        }
    }
    let oriented = match r.strand {
        Some(Strand::Forward) => read.seq.clone(),
        _ => rc(&read.seq),
    };
    let cost = hamming(&window, &oriented);
    if cost != r.mismatches {
        return Err(format!("expansion cost {cost}, reported {}", r.mismatches));
    }
    let distinct: HashSet<Vec<u8>> = nodes.iter().map(|n| canonical(n)).collect();
    let repeats = distinct.len() != nodes.len();
    if repeats != r.repeats_node {
        return Err(format!(
            "repeat flag {} but expansion repeats={repeats}",
            r.repeats_node
        ));
    }
    // every stretch of SEGMENT nodes (consecutive stretches share a node) must
    // be one of the paths enumerate_paths lists from its first node
    const SEGMENT: usize = 8;
    let mut enumerated = 0;
    if !repeats {
        let want: Vec<Kmer> = nodes.iter().map(|n| Kmer::from_bytes(n).unwrap()).collect();
        let mut from = 0;
        loop {
            let to = (from + SEGMENT).min(want.len());
            let PathEnumeration { paths, truncated, .. } =
                enumerate_paths(solid, want[from], to - from, enumeration_budget);
            if truncated {
                return Err("path enumeration truncated".into());
            }
            enumerated += paths.len();
            if !paths.iter().any(|p| p.nodes == want[from..to]) {
                return Err(format!("nodes {from}..{to} missing from enumerated paths"));
            }
            if to == want.len() {
                break;
            }
            from = to - 1;
        }
    }
    Ok(Correspondence {
        branching: true,
        repeats,
        enumerated,
    })
}

/// A small genome plus a haplotype carrying point variants, so the graph branches.
pub fn variant_pair(rng: &mut ChaCha8Rng, len: usize, variants: usize) -> (Vec<u8>, Vec<u8>) {
    let g = genome(rng, len);
    let mut h = g.clone();
    for _ in 0..variants {
        let i = rng.gen_range(0..len);
        h[i] = b"ACGT"[(b"ACGT".iter().position(|&c| c == h[i]).unwrap() + rng.gen_range(1..4)) % 4];
    }
    (g, h)
}

pub fn substitute(rng: &mut ChaCha8Rng, s: &[u8], errors: usize) -> Vec<u8> {
    let mut s = s.to_vec();
    for _ in 0..errors {
        let i = rng.gen_range(0..s.len());
        s[i] = b"ACGT"[(b"ACGT".iter().position(|&c| c == s[i]).unwrap() + rng.gen_range(1..4)) % 4];
    }
    s
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Spectrum preservation and maximality over `count` random genomes.
pub fn run_spectrum(count: usize, seed: u64) -> Result<String, String> {
    let mut rng = seeded(seed);
    let mut unitigs = 0;
    for i in 0..count {
        let k = [5, 7, 9][i % 3];
        let len = rng.gen_range(500..=5_000);
        let g = genome(&mut rng, len);
        let solid = SolidKmerSet::from_sequences(k, [g.as_slice()]).map_err(|e| e.to_string())?;
        let graph = dbgmap::compact(&solid).map_err(|e| e.to_string())?;
        let spectrum = canonical_spectrum([g.as_slice()], k);
        check_spectrum(&graph, &spectrum).map_err(|e| format!("genome {i} (k={k}): {e}"))?;
        check_maximal(&graph, &both_strands(&spectrum)).map_err(|e| format!("genome {i} (k={k}): {e}"))?;
        unitigs += graph.len();
    }
    Ok(format!("{count} genomes, {unitigs} unitigs"))
}

/// Random walks in small graphs: generated length and windowing.
pub fn run_walk_law(count: usize, seed: u64) -> Result<String, String> {
    let mut rng = seeded(seed);
    let mut graphs = Vec::new();
    for k in [3usize, 4, 5, 7, 9] {
        let g = genome(&mut rng, 60);
        let canon = canonical_spectrum([g.as_slice()], k);
        let mut nodes: Vec<Vec<u8>> = both_strands(&canon).into_iter().collect();
        nodes.sort();
        graphs.push((k, nodes));
    }
    for i in 0..count {
        let (k, nodes) = &graphs[i % graphs.len()];
        let oriented: HashSet<Vec<u8>> = nodes.iter().cloned().collect();
        let mut walk = vec![nodes[rng.gen_range(0..nodes.len())].clone()];
        let steps = rng.gen_range(0..40);
        for _ in 0..steps {
            let succ = out_neighbors(walk.last().unwrap(), &oriented);
            if succ.is_empty() {
                break;
            }
            walk.push(succ[rng.gen_range(0..succ.len())].clone());
        }
        let kmers: Vec<Kmer> = walk.iter().map(|n| Kmer::from_bytes(n).unwrap()).collect();
        let text = dbgmap::walk_sequence(&dbgmap::DbgWalk::new(kmers)).map_err(|e| e.to_string())?;
        if text.len() != k + walk.len() - 1 {
            return Err(format!("walk {i}: length {} for {} nodes", text.len(), walk.len()));
        }
        let back: Vec<Vec<u8>> = text.windows(*k).map(|w| w.to_vec()).collect();
        if back != walk {
            return Err(format!("walk {i}: windows differ from nodes"));
        }
    }
    Ok(format!("{count} walks"))
}

/// Mapping/path correspondence on `instances` small variant graphs.
pub fn run_correspondence(instances: usize, reads_per: usize, seed: u64) -> Result<String, String> {
    let mut rng = seeded(seed);
    let (mut branching, mut repeats, mut enumerated) = (0, 0, 0);
    for inst in 0..instances {
        let k = [5, 7, 9][inst % 3];
        let len = rng.gen_range(300..=2_000);
        let (g, h) = variant_pair(&mut rng, len, len / 50);
        let solid = SolidKmerSet::from_sequences(k, [g.as_slice(), h.as_slice()]).map_err(|e| e.to_string())?;
        let gi = GraphIndex::new(dbgmap::compact(&solid).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let params = dbgmap::MappingParams::default();
        for j in 0..reads_per {
            let src = if rng.gen_bool(0.5) { &g } else { &h };
            let rl = rng.gen_range(k + 2..=60.min(len));
            let start = rng.gen_range(0..=len - rl);
            let errors = rng.gen_range(0..=2);
            let mut s = substitute(&mut rng, &src[start..start + rl], errors);
            if rng.gen_bool(0.5) {
                s = rc(&s);
            }
            let read = Read::new(format!("i{inst}r{j}"), &s);
            for r in [
                dbgmap::map_read(&read, &gi.ctx(), &params).map_err(|e| e.to_string())?,
                dbgmap::map_branching(&read, &gi.ctx(), &params).map_err(|e| e.to_string())?,
            ] {
                let c = check_correspondence(&gi, &solid, &read, &r, 200_000)
                    .map_err(|e| format!("instance {inst} read {j}: {e}"))?;
                branching += c.branching as usize;
                repeats += c.repeats as usize;
                enumerated += c.enumerated;
            }
        }
    }
    if branching == 0 {
        return Err("no branching mappings exercised".into());
    }
    Ok(format!(
        "{instances} instances, {branching} branching mappings, {repeats} flagged repeats, {enumerated} enumerated paths"
    ))
}

/// Sharing bound over the graphs of many random and variant genomes.
pub fn run_sharing(count: usize, seed: u64) -> Result<String, String> {
    let mut rng = seeded(seed);
    let mut worst = (0, 0);
    let mut keys = 0;
    for i in 0..count {
        let k = [3, 4, 5, 7, 9][i % 5];
        let len = rng.gen_range(50..=2_000);
        let (g, h) = variant_pair(&mut rng, len, len / 30);
        let gi = GraphIndex::from_sequences(k, [g.as_slice(), h.as_slice()]).map_err(|e| e.to_string())?;
        let w = check_sharing(&gi.anchors).map_err(|e| format!("graph {i}: {e}"))?;
        worst = (worst.0.max(w.0), worst.1.max(w.1));
        keys += gi.anchors.key_count();
    }
    Ok(format!(
        "{count} graphs, {keys} keys, max starts {} max ends {}",
        worst.0, worst.1
    ))
}
