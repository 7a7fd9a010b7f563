//! Binary failure-matrix dump: `FMX1`, then N and T as u64 little-endian, then
//! T rows of `ceil(N / 8)` bytes, LSB-first within each byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::engine::FailureMatrix;
use crate::error::{Error, Result};

pub const FMX_MAGIC: &[u8; 4] = b"FMX1";

pub fn write_fmx(path: impl AsRef<Path>, m: &FailureMatrix) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(FMX_MAGIC).map_err(io)?;
    w.write_all(&(m.nodes as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(m.steps as u64).to_le_bytes()).map_err(io)?;
    let row_bytes = m.nodes.div_ceil(8);
    let mut buf = Vec::with_capacity(m.words_per_row * 8);
    for r in 0..m.steps {
        buf.clear();
        for word in m.row(r) {
            buf.extend_from_slice(&word.to_le_bytes());
        }
        w.write_all(&buf[..row_bytes]).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_fmx(path: impl AsRef<Path>) -> Result<FailureMatrix> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let bad = |msg: &str| Error::Parse {
        path: path.into(),
        line: 0,
        msg: msg.into(),
    };
    let mut r = BufReader::new(File::open(path).map_err(io)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != FMX_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word).map_err(io)?;
    let nodes = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word).map_err(io)?;
    let steps = u64::from_le_bytes(word) as usize;
    let row_bytes = nodes.div_ceil(8);
    let words_per_row = nodes.div_ceil(64);
    let mut words = Vec::with_capacity(words_per_row * steps);
    let mut row = vec![0u8; words_per_row * 8];
    for _ in 0..steps {
        row.fill(0);
        r.read_exact(&mut row[..row_bytes]).map_err(io)?;
        words.extend(row.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(io)?;
    if !rest.is_empty() {
        return Err(bad("trailing bytes after last row"));
    }
    Ok(FailureMatrix {
        nodes,
        steps,
        words_per_row,
        words,
    })
}
