mod common;

use common::*;
use dbgmap::gfa::{links, parse_links, write_gfa};
use dbgmap::{GraphIndex, Side};

#[test]
fn spectrum_and_maximality() {
    run_spectrum(60, 11).unwrap();
}

#[test]
fn spectrum_with_variants_and_coverage() {
    let mut rng = seeded(3);
    for k in [3, 5, 11, 31] {
        let (g, h) = variant_pair(&mut rng, 3_000, 40);
        let gi = GraphIndex::from_sequences(k, [g.as_slice(), h.as_slice()]).unwrap();
        let spectrum = canonical_spectrum([g.as_slice(), h.as_slice()], k);
        check_spectrum(&gi.graph, &spectrum).unwrap();
        check_maximal(&gi.graph, &both_strands(&spectrum)).unwrap();
    }
}

#[test]
fn small_k_dense_graphs() {
    // k=3 on 2 kb saturates the graph with self-loops, hairpins and palindromes
    let mut rng = seeded(17);
    for k in [2, 3, 4] {
        let g = genome(&mut rng, 2_000);
        let gi = GraphIndex::from_sequences(k, [g.as_slice()]).unwrap();
        let spectrum = canonical_spectrum([g.as_slice()], k);
        check_spectrum(&gi.graph, &spectrum).unwrap();
        check_maximal(&gi.graph, &both_strands(&spectrum)).unwrap();
    }
}

#[test]
fn walk_law() {
    run_walk_law(1_000, 5).unwrap();
}

#[test]
fn mapping_path_correspondence() {
    run_correspondence(20, 40, 23).unwrap();
}

#[test]
fn overlap_sharing_bound() {
    run_sharing(50, 31).unwrap();
}

#[test]
fn gfa_links_match_anchor_incidences() {
    let mut rng = seeded(8);
    let (g, h) = variant_pair(&mut rng, 1_500, 30);
    let gi = GraphIndex::from_sequences(7, [g.as_slice(), h.as_slice()]).unwrap();
    let mut buf = Vec::new();
    write_gfa(&mut buf, &gi.graph, &gi.anchors).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut parsed = parse_links(&text).unwrap();
    parsed.sort();
    assert_eq!(parsed, links(&gi.anchors));
    assert!(!parsed.is_empty());
    let w = gi.graph.k() - 1;
    for l in &parsed {
        let a = gi.graph.oriented(l.from, l.from_orientation);
        let b = gi.graph.oriented(l.to, l.to_orientation);
        assert_eq!(&a[a.len() - w..], &b[..w]);
        let key = dbgmap::Kmer::from_bytes(&b[..w]).unwrap();
        let incs = gi.anchors.query(&key).unwrap();
        assert!(incs.iter().any(|i| i.side == Side::EndsWith && i.unitig_id == l.from));
        assert!(incs.iter().any(|i| i.side == Side::StartsWith && i.unitig_id == l.to));
    }
    let segments = text.lines().filter(|l| l.starts_with("S\t")).count();
    assert_eq!(segments, gi.graph.len());
}
