//! Trace files.
//!
//! TEXT holds one decimal id per line; blank lines and lines starting with
//! `#` are skipped. BINARY is a bare sequence of little-endian `u64` ids.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use assoclab_core::{ItemId, Trace};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum TraceFormat {
    Text,
    Binary,
}

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("byte {offset}: {message}")]
    Parse { offset: u64, message: String },
}

pub fn parse_text(bytes: &[u8]) -> Result<Trace, TraceIoError> {
    let mut out = Trace::new();
    let mut offset = 0u64;
    for line in bytes.split_inclusive(|&b| b == b'\n') {
        let start = offset;
        offset += line.len() as u64;
        let body = line.strip_suffix(b"\n").unwrap_or(line);
        let body = body.strip_suffix(b"\r").unwrap_or(body);
        let lead = body.iter().take_while(|b| b.is_ascii_whitespace()).count();
        let text = body[lead..].trim_ascii_end();
        if text.is_empty() || text[0] == b'#' {
            continue;
        }
        let s = std::str::from_utf8(text).map_err(|_| TraceIoError::Parse {
            offset: start + lead as u64,
            message: "not valid UTF-8".into(),
        })?;
        let id: u64 = s.parse().map_err(|e| TraceIoError::Parse {
            offset: start + lead as u64,
            message: format!("bad item id {s:?}: {e}"),
        })?;
        out.push(ItemId(id));
    }
    Ok(out)
}

pub fn parse_binary(bytes: &[u8]) -> Result<Trace, TraceIoError> {
    let whole = bytes.len() / 8 * 8;
    if whole != bytes.len() {
        return Err(TraceIoError::Parse {
            offset: whole as u64,
            message: format!("truncated record: {} trailing bytes", bytes.len() - whole),
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| ItemId(u64::from_le_bytes(c.try_into().unwrap())))
        .collect())
}

pub fn load_trace(path: &Path, format: TraceFormat) -> Result<Trace, TraceIoError> {
    let bytes = fs::read(path).map_err(|source| TraceIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        TraceFormat::Text => parse_text(&bytes),
        TraceFormat::Binary => parse_binary(&bytes),
    }
}

pub fn write_trace<W: Write>(mut w: W, trace: &Trace, format: TraceFormat) -> io::Result<()> {
    match format {
        TraceFormat::Text => {
            for x in trace {
                writeln!(w, "{}", x.0)?;
            }
        }
        TraceFormat::Binary => {
            for x in trace {
                w.write_all(&x.0.to_le_bytes())?;
            }
        }
    }
    w.flush()
}

pub fn save_trace(path: &Path, trace: &Trace, format: TraceFormat) -> Result<(), TraceIoError> {
    let io_err = |source| TraceIoError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    write_trace(BufWriter::new(file), trace, format).map_err(io_err)
}
