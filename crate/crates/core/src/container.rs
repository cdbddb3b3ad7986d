//! Versioned little-endian binary container for model parameters.
//!
//! Layout: 4-byte magic `ACGL`, `u16` format version, `u16` payload kind,
//! then the payload as a sequence of `u64` integers and row-major `f64`
//! matrices. Readers reject trailing bytes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const MAGIC: [u8; 4] = *b"ACGL";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum PayloadKind {
    Backbone = 1,
    Expander = 2,
    AnalyticState = 3,
}

impl PayloadKind {
    fn from_u16(v: u16) -> Option<Self> {
        match v {
            1 => Some(Self::Backbone),
            2 => Some(Self::Expander),
            3 => Some(Self::AnalyticState),
            _ => None,
        }
    }
}

pub struct ContainerWriter {
    buf: Vec<u8>,
}

impl ContainerWriter {
    pub fn new(kind: PayloadKind) -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(&MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(kind as u16).to_le_bytes());
        Self { buf }
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn f64(&mut self, v: f64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    /// Row-major entries only; dimensions are written separately by the caller.
    pub fn matrix(&mut self, m: &Matrix) -> &mut Self {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                self.f64(m[(i, j)]);
            }
        }
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct ContainerReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ContainerReader<'a> {
    pub fn open(bytes: &'a [u8], expected: PayloadKind) -> Result<Self> {
        if bytes.len() < 8 || bytes[..4] != MAGIC {
            return Err(Error::Container("missing ACGL magic".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(Error::Container(format!(
                "unsupported format version {version}"
            )));
        }
        let kind = u16::from_le_bytes([bytes[6], bytes[7]]);
        match PayloadKind::from_u16(kind) {
            Some(k) if k == expected => Ok(Self { bytes, pos: 8 }),
            Some(k) => Err(Error::Container(format!(
                "expected {expected:?} payload, found {k:?}"
            ))),
            None => Err(Error::Container(format!("unknown payload kind {kind}"))),
        }
    }

    fn take8(&mut self) -> Result<[u8; 8]> {
        let end = self.pos + 8;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Container("truncated payload".into()))?;
        self.pos = end;
        Ok(chunk.try_into().expect("8-byte slice"))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take8()?))
    }

    pub fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?)
            .map_err(|_| Error::Container("dimension overflows usize".into()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take8()?))
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let needed = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::Container("matrix size overflows".into()))?;
        if self.bytes.len() - self.pos < needed {
            return Err(Error::Container(format!(
                "payload too short for a {rows}x{cols} matrix"
            )));
        }
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.f64()?;
            }
        }
        Ok(m)
    }

    pub fn finish(self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Container(format!(
                "{} trailing bytes",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}
