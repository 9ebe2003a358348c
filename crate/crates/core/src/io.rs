//! Stream files: text (one decimal id per line) or binary (16-byte header
//! with magic `RSTRM1` and `u64` universe size, then little-endian `u64`
//! ids).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::stream::Stream;

pub const MAGIC: [u8; 8] = *b"RSTRM1\0\0";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Binary,
}

pub fn write_stream(path: &Path, stream: &Stream, format: Format) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        Format::Text => {
            for &a in stream.updates() {
                writeln!(w, "{a}")?;
            }
        }
        Format::Binary => {
            w.write_all(&MAGIC)?;
            w.write_all(&stream.universe().to_le_bytes())?;
            for &a in stream.updates() {
                w.write_all(&a.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a stream, detecting the format from the magic bytes. Text files
/// carry no universe size; `n` supplies it, defaulting to the largest id.
pub fn read_stream(path: &Path, n: Option<u64>) -> Result<Stream> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() >= 16 && bytes[..8] == MAGIC {
        parse_binary(&bytes, n)
    } else {
        parse_text(&bytes, n)
    }
}

fn parse_binary(bytes: &[u8], n: Option<u64>) -> Result<Stream> {
    let declared = u64::from_le_bytes(bytes[8..16].try_into().expect("eight bytes"));
    let body = &bytes[16..];
    if body.len() % 8 != 0 {
        return Err(Error::Format(format!("binary body of {} bytes is not a multiple of 8", body.len())));
    }
    let updates = body.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().expect("eight bytes"))).collect();
    Stream::new(n.unwrap_or(declared), updates)
}

fn parse_text(bytes: &[u8], n: Option<u64>) -> Result<Stream> {
    let mut updates = Vec::new();
    for (no, line) in BufReader::new(bytes).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: u64 = t.parse().map_err(|_| Error::Format(format!("line {}: `{t}` is not an item id", no + 1)))?;
        updates.push(v);
    }
    let n = n.unwrap_or_else(|| updates.iter().copied().max().unwrap_or(1));
    Stream::new(n, updates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let s = Stream::new(10, vec![3, 1, 4, 1, 5, 9, 2, 6]).unwrap();
        for (name, fmt) in [("a.txt", Format::Text), ("a.bin", Format::Binary)] {
            let p = dir.path().join(name);
            write_stream(&p, &s, fmt).unwrap();
            let back = read_stream(&p, Some(10)).unwrap();
            assert_eq!(back.updates(), s.updates());
        }
        let p = dir.path().join("a.bin");
        assert_eq!(read_stream(&p, None).unwrap().universe(), 10);
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 16 + 8 * 8);
    }

    #[test]
    fn rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.txt");
        std::fs::write(&p, "1\nx\n").unwrap();
        assert!(matches!(read_stream(&p, None), Err(Error::Format(_))));
        std::fs::write(&p, "1\n0\n").unwrap();
        assert!(matches!(read_stream(&p, None), Err(Error::ItemOutOfRange { .. })));
    }
}
