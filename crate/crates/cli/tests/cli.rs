use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dbgmap::eval::random_genome;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbgmap")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_reference(dir: &Path, len: usize) -> (Vec<u8>, std::path::PathBuf) {
    let g = random_genome(len, 77);
    let path = dir.join("ref.fa");
    fs::write(&path, [b">ref\n".as_slice(), &g, b"\n"].concat()).unwrap();
    (g, path)
}

fn value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .to_string()
}

#[test]
fn build_index_map_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let (g, reference) = write_reference(dir.path(), 1_000);
    let unitigs = dir.path().join("u.fa");
    let gfa = dir.path().join("g.gfa");
    let o = run(&[
        "build",
        p(&reference),
        "-k",
        "21",
        "-c",
        "1",
        "-o",
        p(&unitigs),
        "--gfa",
        p(&gfa),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(value(&out, "unitig_count"), "1");
    assert_eq!(value(&out, "mean_len"), "1000.00");
    assert!(fs::read_to_string(&gfa).unwrap().contains("S\tu0\t"));
    // c=1 on a single reference: the one unitig spells the reference on some strand
    let fasta = fs::read_to_string(&unitigs).unwrap();
    let seq = fasta.lines().nth(1).unwrap().as_bytes().to_vec();
    assert!(seq == g || seq == dbgmap::reverse_complement(&g).unwrap());

    let idx = dir.path().join("u.idx");
    let o = run(&["index", p(&unitigs), "-k", "21", "--index-out", p(&idx)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(value(&stdout(&o), "anchor_keys"), "2");

    let reads = dir.path().join("reads.fq");
    let mut fq = String::new();
    for (i, s) in (0..900).step_by(100).enumerate() {
        let seq = String::from_utf8(g[s..s + 100].to_vec()).unwrap();
        fq.push_str(&format!("@r{i}\n{seq}\n+\n{}\n", "I".repeat(100)));
    }
    fq.push_str("@short\nACGT\n+\nIIII\n");
    fs::write(&reads, fq).unwrap();
    let tsv = dir.path().join("out.tsv");
    for extra in [vec![], vec!["--index-in", p(&idx)], vec!["--threads", "3"]] {
        let mut args = vec!["map", "-g", p(&unitigs), p(&reads), "-k", "21", "-o", p(&tsv)];
        args.extend(extra);
        let o = run(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = fs::read_to_string(&tsv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], dbgmap::tsv::HEADER);
        assert_eq!(lines.len(), 11);
        for (i, l) in lines[1..10].iter().enumerate() {
            assert!(l.starts_with(&format!("r{i}\tmapped\t")), "{l}");
            assert!(l.ends_with("\tsingle_unitig\t*"), "{l}");
        }
        assert!(lines[10].starts_with("short\tunmapped"));
        let err = stderr(&o);
        assert!(
            err.contains("reads=10\tsingle_unitig_pct=90.00\tbranching_path_pct=0.00\tunmapped_pct=10.00"),
            "{err}"
        );
    }
}

#[test]
fn branching_reads_and_gfa_paths() {
    let dir = tempfile::tempdir().unwrap();
    let g = random_genome(600, 5);
    let mut h = g.clone();
    h[300] = if h[300] == b'A' { b'C' } else { b'A' };
    let input = dir.path().join("in.fa");
    fs::write(&input, [b">a\n".as_slice(), &g, b"\n>b\n", &h, b"\n"].concat()).unwrap();
    let unitigs = dir.path().join("u.fa");
    let o = run(&["build", p(&input), "-k", "15", "-c", "1", "-o", p(&unitigs)]);
    assert!(o.status.success());
    assert_eq!(value(&stdout(&o), "unitig_count"), "4");
    let reads = dir.path().join("r.fa");
    fs::write(&reads, [b">x\n".as_slice(), &h[250..350], b"\n"].concat()).unwrap();
    let paths = dir.path().join("p.gfa");
    let o = run(&["map", "-g", p(&unitigs), p(&reads), "-k", "15", "--gfa", p(&paths)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let rec: Vec<&str> = out.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(rec[1], "mapped");
    assert_eq!(rec[7], "branching_path");
    assert_eq!(rec[3].split(',').count(), 3);
    let gfa = fs::read_to_string(&paths).unwrap();
    let p_line = gfa.lines().find(|l| l.starts_with("P\tx\t")).unwrap();
    assert!(p_line.ends_with("\t14M,14M"));
}

#[test]
fn empty_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.fa");
    fs::write(&empty, "").unwrap();
    let o = run(&["build", p(&empty), "-o", p(&dir.path().join("u.fa"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no sequences"));
}

#[test]
fn missing_files_and_bad_usage_exit_2() {
    let o = run(&["map", "-g", "/nonexistent/u.fa", "/nonexistent/r.fa"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["build"]).status.code(), Some(2));
    assert_eq!(run(&["build", "x.fa", "-k", "64"]).status.code(), Some(2));
    assert_eq!(run(&["build", "x.fa", "-c", "0"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn eval_reports_and_gates() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let truth = dir.path().join("t.tsv");
    let base = [
        "eval",
        "--genome-len",
        "20000",
        "-k",
        "21",
        "--reads",
        "500",
        "--rates",
        "0,0.01",
        "--exhaustive",
    ];
    let mut args = base.to_vec();
    args.extend(["-o", p(&csv), "--truth", p(&truth), "--min-recall", "0.5"]);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "error_rate,recall,d0,d1,d2,d3,d4plus,subopt_frac,reads_per_sec"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,1.000000,100.0000,"));
    let truth_text = fs::read_to_string(&truth).unwrap();
    assert_eq!(truth_text.lines().count(), 501);
    assert!(truth_text.starts_with("read_id\torigin\tstrand\terror_positions\n"));

    // recall at 1% is below 1.0, so this gate fails
    let mut args = base.to_vec();
    args.extend(["--min-recall", "1.0"]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("gate failed at rate 0.01"));

    // same seed, same report (throughput aside)
    let strip = |s: &str| -> Vec<String> { s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect() };
    let a = run(&base);
    let b = run(&base);
    assert_eq!(strip(&stdout(&a)), strip(&stdout(&b)));
}
