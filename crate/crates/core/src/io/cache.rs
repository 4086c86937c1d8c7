//! Binary cache container.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic    "SEMX"
//! version  u16
//! flags    u16   bit 0: values are f64 (else f32); bit 1: tagged sections follow the matrix
//! n        u64
//! d        u32
//! vocab    n x (u32 byte length, UTF-8 bytes)
//! matrix   n*d values, row-major
//! [count u32, then count x (tag [u8; 4], length u64, payload)]   if flag bit 1
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;

use super::{EmbeddingMatrix, Vocabulary};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"SEMX";
pub const VERSION: u16 = 1;
pub const FLAG_F64: u16 = 1;
pub const FLAG_SECTIONS: u16 = 1 << 1;

/// Storage precision of the matrix block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    F64,
    F32,
}

/// A tagged payload appended after the matrix (fitted models live here).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub tag: [u8; 4],
    pub payload: Vec<u8>,
}

/// Everything a cache file holds.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheContainer {
    pub vocab: Arc<Vocabulary>,
    pub data: Array2<f64>,
    pub precision: Precision,
    pub sections: Vec<Section>,
}

impl CacheContainer {
    pub fn from_embeddings(e: &EmbeddingMatrix) -> Self {
        Self {
            vocab: e.shared_vocab(),
            data: e.data().clone(),
            precision: Precision::F64,
            sections: Vec::new(),
        }
    }

    pub fn section(&self, tag: &[u8; 4]) -> Option<&Section> {
        self.sections.iter().find(|s| &s.tag == tag)
    }

    pub fn into_embeddings(self, label: impl Into<String>) -> Result<EmbeddingMatrix> {
        EmbeddingMatrix::new(self.vocab, self.data, label)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.data.nrows();
        let d = self.data.ncols();
        if n != self.vocab.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vocab.len(),
                found: n,
            });
        }
        let d32 = u32::try_from(d).map_err(|_| Error::invalid("dimension exceeds u32"))?;
        let mut flags = 0u16;
        if self.precision == Precision::F64 {
            flags |= FLAG_F64;
        }
        if !self.sections.is_empty() {
            flags |= FLAG_SECTIONS;
        }
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&flags.to_le_bytes())?;
        w.write_all(&(n as u64).to_le_bytes())?;
        w.write_all(&d32.to_le_bytes())?;
        for word in self.vocab.words() {
            let len = u32::try_from(word.len()).map_err(|_| Error::invalid("word too long"))?;
            w.write_all(&len.to_le_bytes())?;
            w.write_all(word.as_bytes())?;
        }
        // iter() on a standard-layout array is row-major
        match self.precision {
            Precision::F64 => {
                for v in self.data.iter() {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
            Precision::F32 => {
                for v in self.data.iter() {
                    w.write_all(&(*v as f32).to_le_bytes())?;
                }
            }
        }
        if !self.sections.is_empty() {
            w.write_all(&(self.sections.len() as u32).to_le_bytes())?;
            for s in &self.sections {
                w.write_all(&s.tag)?;
                w.write_all(&(s.payload.len() as u64).to_le_bytes())?;
                w.write_all(&s.payload)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic, "header")?;
        if magic != MAGIC {
            return Err(Error::BadMagic);
        }
        let version = read_u16(&mut r, "header")?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let flags = read_u16(&mut r, "header")?;
        if flags & !(FLAG_F64 | FLAG_SECTIONS) != 0 {
            return Err(Error::MalformedCache(format!("unknown flags {flags:#06x}")));
        }
        let n = usize::try_from(read_u64(&mut r, "header")?)
            .map_err(|_| Error::MalformedCache("row count overflows".into()))?;
        let d = read_u32(&mut r, "header")? as usize;

        let mut words = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let len = read_u32(&mut r, "vocabulary")? as usize;
            let mut buf = vec![0u8; len];
            read_exact(&mut r, &mut buf, "vocabulary")?;
            let word = String::from_utf8(buf)
                .map_err(|_| Error::MalformedCache("word is not valid UTF-8".into()))?;
            words.push(word);
        }
        let vocab = Vocabulary::new(words).map_err(|e| Error::MalformedCache(e.to_string()))?;

        let total = n
            .checked_mul(d)
            .ok_or_else(|| Error::MalformedCache("matrix size overflows".into()))?;
        let precision = if flags & FLAG_F64 != 0 {
            Precision::F64
        } else {
            Precision::F32
        };
        let mut values = Vec::with_capacity(total.min(1 << 24));
        match precision {
            Precision::F64 => {
                let mut b = [0u8; 8];
                for _ in 0..total {
                    read_exact(&mut r, &mut b, "matrix")?;
                    values.push(f64::from_le_bytes(b));
                }
            }
            Precision::F32 => {
                let mut b = [0u8; 4];
                for _ in 0..total {
                    read_exact(&mut r, &mut b, "matrix")?;
                    values.push(f32::from_le_bytes(b) as f64);
                }
            }
        }
        let data = Array2::from_shape_vec((n, d), values)
            .map_err(|e| Error::MalformedCache(e.to_string()))?;

        let mut sections = Vec::new();
        if flags & FLAG_SECTIONS != 0 {
            let count = read_u32(&mut r, "section table")?;
            for _ in 0..count {
                let mut tag = [0u8; 4];
                read_exact(&mut r, &mut tag, "section tag")?;
                let len = read_u64(&mut r, "section length")? as usize;
                let mut payload = Vec::with_capacity(len.min(1 << 24));
                let got = (&mut r).take(len as u64).read_to_end(&mut payload)?;
                if got != len {
                    return Err(Error::Truncated(format!(
                        "section {:?}",
                        String::from_utf8_lossy(&tag)
                    )));
                }
                sections.push(Section { tag, payload });
            }
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::MalformedCache("trailing bytes after payload".into()));
        }

        Ok(Self {
            vocab: Arc::new(vocab),
            data,
            precision,
            sections,
        })
    }

    pub fn write_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path.as_ref())?;
        self.write_to(BufWriter::new(file))
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path.as_ref())?;
        Self::read_from(BufReader::new(file))
    }
}

/// Writes `e` as a 64-bit cache without sections.
pub fn write_cache(e: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    CacheContainer::from_embeddings(e).write_path(path)
}

/// Reads a cache file; the file name becomes the matrix label.
pub fn read_cache(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let label = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    CacheContainer::read_path(path)?.into_embeddings(label)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Truncated(what.to_owned()),
        _ => Error::Io(e),
    })
}

fn read_u16<R: Read>(r: &mut R, what: &str) -> Result<u16> {
    let mut b = [0u8; 2];
    read_exact(r, &mut b, what)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R, what: &str) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, what)?;
    Ok(u64::from_le_bytes(b))
}

/// Little-endian payload builder used by model sections.
#[derive(Debug, Default)]
pub(crate) struct PayloadWriter(Vec<u8>);

impl PayloadWriter {
    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.0.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn f64(&mut self, v: f64) -> &mut Self {
        self.0.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn f64s<'a>(&mut self, vs: impl IntoIterator<Item = &'a f64>) -> &mut Self {
        for v in vs {
            self.f64(*v);
        }
        self
    }

    pub fn finish(&mut self) -> Vec<u8> {
        std::mem::take(&mut self.0)
    }
}

/// Cursor over a section payload.
pub(crate) struct PayloadReader<'a> {
    buf: &'a [u8],
    tag: &'static str,
}

impl<'a> PayloadReader<'a> {
    pub fn new(buf: &'a [u8], tag: &'static str) -> Self {
        Self { buf, tag }
    }

    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.buf.len() < k {
            return Err(Error::Truncated(format!("section {}", self.tag)));
        }
        let (head, tail) = self.buf.split_at(k);
        self.buf = tail;
        Ok(head)
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64s(&mut self, k: usize) -> Result<Vec<f64>> {
        (0..k).map(|_| self.f64()).collect()
    }

    pub fn finish(self) -> Result<()> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(Error::MalformedCache(format!(
                "{} trailing bytes in section {}",
                self.buf.len(),
                self.tag
            )))
        }
    }
}
