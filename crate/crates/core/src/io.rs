//! FASTA / FASTQ reading (plain or gzip, detected by magic bytes) and FASTA writing.

use std::fs::File;
use std::io::{BufRead, BufReader, Read as _, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::seq::Read;

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Opens a file, transparently decompressing gzip content.
pub fn open_maybe_gz(path: &Path) -> Result<Box<dyn BufRead + Send>> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 2];
    let n = read_up_to(&mut file, &mut magic)?;
    let file = File::open(path)?;
    if n == 2 && magic == GZIP_MAGIC {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

fn read_up_to(file: &mut File, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = file.read(&mut buf[filled..])?;
        if n == 0 {
            break;
        }
        filled += n;
    }
    Ok(filled)
}

/// Streaming parser over FASTA or FASTQ records; the format is picked from the
/// first non-empty line (`>` or `@`).
pub struct SeqReader<R: BufRead> {
    inner: R,
    line: Vec<u8>,
    pending_header: Option<Vec<u8>>,
    done: bool,
    line_no: usize,
}

impl<R: BufRead> SeqReader<R> {
    pub fn new(inner: R) -> Self {
        SeqReader {
            inner,
            line: Vec::new(),
            pending_header: None,
            done: false,
            line_no: 0,
        }
    }

    fn next_line(&mut self) -> Result<bool> {
        self.line.clear();
        let n = self.inner.read_until(b'\n', &mut self.line)?;
        if n == 0 {
            return Ok(false);
        }
        self.line_no += 1;
        while matches!(self.line.last(), Some(b'\n' | b'\r')) {
            self.line.pop();
        }
        Ok(true)
    }

    fn read_record(&mut self) -> Result<Option<Read>> {
        let header = match self.pending_header.take() {
            Some(h) => h,
            None => loop {
                if !self.next_line()? {
                    return Ok(None);
                }
                if !self.line.is_empty() {
                    break self.line.clone();
                }
            },
        };
        match header[0] {
            b'>' => self.read_fasta_body(&header[1..]).map(Some),
            b'@' => self.read_fastq_body(&header[1..]).map(Some),
            _ => Err(Error::Format(format!(
                "line {}: expected '>' or '@' header",
                self.line_no
            ))),
        }
    }

    fn read_fasta_body(&mut self, header: &[u8]) -> Result<Read> {
        let id = record_id(header);
        let mut seq = Vec::new();
        while self.next_line()? {
            if self.line.first() == Some(&b'>') {
                self.pending_header = Some(self.line.clone());
                break;
            }
            seq.extend(self.line.iter().filter(|c| !c.is_ascii_whitespace()));
        }
        Ok(Read::new(id, &seq))
    }

    fn read_fastq_body(&mut self, header: &[u8]) -> Result<Read> {
        let id = record_id(header);
        if !self.next_line()? {
            return Err(Error::Format(format!("record {id}: missing sequence")));
        }
        let seq = self.line.clone();
        if !self.next_line()? || self.line.first() != Some(&b'+') {
            return Err(Error::Format(format!("record {id}: missing '+' line")));
        }
        if !self.next_line()? {
            return Err(Error::Format(format!("record {id}: missing quality")));
        }
        let qual = self.line.clone();
        if qual.len() != seq.len() {
            return Err(Error::Format(format!(
                "record {id}: quality length {} != sequence length {}",
                qual.len(),
                seq.len()
            )));
        }
        let mut read = Read::new(id, &seq);
        read.qual = Some(qual);
        Ok(read)
    }
}

fn record_id(header: &[u8]) -> String {
    let s = String::from_utf8_lossy(header);
    s.split_whitespace().next().unwrap_or("").to_string()
}

impl<R: BufRead> Iterator for SeqReader<R> {
    type Item = Result<Read>;

    fn next(&mut self) -> Option<Result<Read>> {
        if self.done {
            return None;
        }
        match self.read_record() {
            Ok(Some(r)) => Some(Ok(r)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Makes read ids unique and non-empty, keeping record order.
///
/// The first occurrence keeps its id; later duplicates get `.1`, `.2`, ...
#[derive(Default)]
pub struct IdDeduplicator {
    seen: FxHashMap<String, usize>,
}

impl IdDeduplicator {
    pub fn fix(&mut self, read: &mut Read, index: usize) {
        if read.id.is_empty() {
            read.id = format!("read{index}");
        }
        loop {
            let n = self.seen.entry(read.id.clone()).or_insert(0);
            if *n == 0 {
                *n = 1;
                return;
            }
            let candidate = format!("{}.{}", read.id, *n);
            *n += 1;
            if !self.seen.contains_key(&candidate) {
                self.seen.insert(candidate.clone(), 1);
                read.id = candidate;
                return;
            }
        }
    }
}

/// Reads every record of a FASTA/FASTQ file, with de-duplicated ids.
pub fn read_all(path: &Path) -> Result<Vec<Read>> {
    let mut dedup = IdDeduplicator::default();
    SeqReader::new(open_maybe_gz(path)?)
        .enumerate()
        .map(|(i, r)| {
            r.map(|mut r| {
                dedup.fix(&mut r, i);
                r
            })
        })
        .collect()
}

pub fn write_fasta_record<W: Write>(out: &mut W, id: &str, seq: &[u8]) -> Result<()> {
    out.write_all(b">")?;
    out.write_all(id.as_bytes())?;
    out.write_all(b"\n")?;
    out.write_all(seq)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(s: &str) -> Vec<Read> {
        SeqReader::new(Cursor::new(s.as_bytes().to_vec()))
            .collect::<Result<Vec<_>>>()
            .unwrap()
    }

    #[test]
    fn multi_line_fasta() {
        let recs = parse(">a desc\nACG\nTt\n\n>b\nnnA\n");
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].id, "a");
        assert_eq!(recs[0].seq, b"ACGTT");
        assert_eq!(recs[1].seq, b"NNA");
    }

    #[test]
    fn fastq_records() {
        let recs = parse("@r1\nACGT\n+\nIIII\n@r2 x\nAC\n+r2\nII\n");
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].id, "r2");
        assert_eq!(recs[0].qual.as_deref(), Some(&b"IIII"[..]));
    }

    #[test]
    fn fastq_length_mismatch_is_error() {
        let r: Result<Vec<Read>> = SeqReader::new(Cursor::new(b"@r\nACGT\n+\nII\n".to_vec())).collect();
        assert!(r.is_err());
    }

    #[test]
    fn gzip_detected_by_magic() {
        use flate2::write::GzEncoder;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("reads.noext");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), flate2::Compression::fast());
        enc.write_all(b">x\nACGT\n>y\nGG\n").unwrap();
        enc.finish().unwrap();
        let recs = read_all(&path).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].seq, b"GG");
    }

    #[test]
    fn duplicate_ids_are_suffixed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.fa");
        std::fs::write(&path, ">a\nA\n>a\nC\n>a.1\nG\n>\nT\n").unwrap();
        let ids: Vec<String> = read_all(&path).unwrap().into_iter().map(|r| r.id).collect();
        assert_eq!(ids, ["a", "a.1", "a.1.1", "read3"]);
    }
}
