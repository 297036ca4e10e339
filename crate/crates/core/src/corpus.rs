//! Line-oriented sentence files.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use log::warn;

use crate::error::Result;

/// A raw line: valid UTF-8 text or the original bytes when invalid.
pub type RawLine = std::result::Result<String, Vec<u8>>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReadStats {
    pub lines: u64,
    pub invalid_utf8: u64,
}

fn strip_eol(buf: &mut Vec<u8>) {
    if buf.last() == Some(&b'\n') {
        buf.pop();
        if buf.last() == Some(&b'\r') {
            buf.pop();
        }
    }
}

/// Iterates raw lines of a reader, keeping invalid UTF-8 lines as bytes.
pub struct RawLines<R> {
    reader: R,
}

impl<R: BufRead> RawLines<R> {
    pub fn new(reader: R) -> Self {
        RawLines { reader }
    }
}

impl<R: BufRead> Iterator for RawLines<R> {
    type Item = Result<RawLine>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut buf = Vec::new();
        match self.reader.read_until(b'\n', &mut buf) {
            Ok(0) => None,
            Ok(_) => {
                strip_eol(&mut buf);
                Some(Ok(String::from_utf8(buf).map_err(|e| e.into_bytes())))
            }
            Err(e) => Some(Err(e.into())),
        }
    }
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::with_capacity(1 << 20, File::open(path)?))
}

/// Streams valid lines of `reader` to `sink` in batches of `batch` lines.
/// Invalid UTF-8 lines are skipped and counted.
pub fn for_each_batch<R: Read>(
    reader: R,
    batch: usize,
    mut sink: impl FnMut(&[String]) -> Result<()>,
) -> Result<ReadStats> {
    let mut stats = ReadStats::default();
    let mut buf: Vec<String> = Vec::with_capacity(batch);
    for line in RawLines::new(BufReader::new(reader)) {
        stats.lines += 1;
        match line? {
            Ok(s) => buf.push(s),
            Err(_) => stats.invalid_utf8 += 1,
        }
        if buf.len() >= batch {
            sink(&buf)?;
            buf.clear();
        }
    }
    if !buf.is_empty() {
        sink(&buf)?;
    }
    if stats.invalid_utf8 > 0 {
        warn!("skipped {} lines that are not valid UTF-8", stats.invalid_utf8);
    }
    Ok(stats)
}

/// Reads all lines, converting invalid UTF-8 lossily.
pub fn read_lines_lossy(path: &Path) -> Result<Vec<String>> {
    RawLines::new(open(path)?)
        .map(|l| {
            l.map(|r| r.unwrap_or_else(|bytes| String::from_utf8_lossy(&bytes).into_owned()))
        })
        .collect()
}

pub fn read_raw_lines(path: &Path) -> Result<Vec<RawLine>> {
    RawLines::new(open(path)?).collect()
}
