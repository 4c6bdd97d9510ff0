//! IDX container parsing and writing.
//!
//! Big-endian layout: u32 magic (2051 images / 2049 labels), u32 count,
//! then for images u32 rows and u32 cols followed by count·rows·cols raw
//! bytes, for labels count raw bytes. Gzip-compressed files are detected by
//! the 0x1f 0x8b signature regardless of extension. All format errors carry
//! the byte offset they were detected at (offsets refer to the decompressed
//! stream for gzip inputs).

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use super::DataError;
use crate::linalg::SparseVector;
use crate::{cast, Scalar};

pub(crate) const IMAGES_MAGIC: u32 = 2051;
pub(crate) const LABELS_MAGIC: u32 = 2049;

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DataError> {
        if self.pos + n > self.buf.len() {
            return Err(DataError::Truncated {
                offset: self.pos,
                needed: n,
                available: self.buf.len() - self.pos,
            });
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn read_u32_be(&mut self) -> Result<u32, DataError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>, DataError> {
    let raw = fs::read(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out)?;
        return Ok(out);
    }
    Ok(raw)
}

/// Parses an images file into sparse vectors (zero pixels omitted, bytes
/// scaled by 1/255). Returns the vectors and the flat dimension rows·cols.
pub(crate) fn read_images<T: Scalar>(path: &Path) -> Result<(Vec<SparseVector<T>>, usize), DataError> {
    let buf = read_maybe_gzip(path)?;
    let mut cur = Cursor { buf: &buf, pos: 0 };
    let magic = cur.read_u32_be()?;
    if magic != IMAGES_MAGIC {
        return Err(DataError::BadMagic { offset: 0, expected: IMAGES_MAGIC, found: magic });
    }
    let count = cur.read_u32_be()? as usize;
    let rows = cur.read_u32_be()? as usize;
    let cols = cur.read_u32_be()? as usize;
    if rows == 0 || cols == 0 {
        return Err(DataError::ZeroDimensions { offset: 8 });
    }
    let dim = rows * cols;
    let mut examples = Vec::with_capacity(count);
    for _ in 0..count {
        let pixels = cur.take(dim)?;
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, &b) in pixels.iter().enumerate() {
            if b != 0 {
                indices.push(i as u32);
                values.push(cast::<T>(b as f64 / 255.0));
            }
        }
        // Indices are increasing and nonzero by construction.
        examples.push(SparseVector::new(dim, indices, values)?);
    }
    if cur.pos != buf.len() {
        return Err(DataError::TrailingBytes { offset: cur.pos, extra: buf.len() - cur.pos });
    }
    Ok((examples, dim))
}

/// Parses a labels file into raw class bytes, each validated to 0–9.
pub(crate) fn read_labels(path: &Path) -> Result<Vec<u8>, DataError> {
    let buf = read_maybe_gzip(path)?;
    let mut cur = Cursor { buf: &buf, pos: 0 };
    let magic = cur.read_u32_be()?;
    if magic != LABELS_MAGIC {
        return Err(DataError::BadMagic { offset: 0, expected: LABELS_MAGIC, found: magic });
    }
    let count = cur.read_u32_be()? as usize;
    let bytes = cur.take(count)?;
    if let Some(bad) = bytes.iter().position(|&b| b > 9) {
        return Err(DataError::LabelOutOfRange { index: bad, value: bytes[bad] });
    }
    if cur.pos != buf.len() {
        return Err(DataError::TrailingBytes { offset: cur.pos, extra: buf.len() - cur.pos });
    }
    Ok(bytes.to_vec())
}

/// Serializes byte-valued images (every stored value must be k/255 for some
/// byte k — the loader's image of the format).
pub(crate) fn write_images<T: Scalar>(
    path: &Path,
    examples: &[SparseVector<T>],
    rows: usize,
    cols: usize,
) -> Result<(), DataError> {
    let dim = rows * cols;
    let mut buf = Vec::with_capacity(16 + examples.len() * dim);
    buf.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    buf.extend_from_slice(&(examples.len() as u32).to_be_bytes());
    buf.extend_from_slice(&(rows as u32).to_be_bytes());
    buf.extend_from_slice(&(cols as u32).to_be_bytes());
    for (n, example) in examples.iter().enumerate() {
        if example.dim() != dim {
            return Err(DataError::InvalidParameters {
                reason: format!("example {n} has dimension {}, expected {dim}", example.dim()),
            });
        }
        let mut pixels = vec![0u8; dim];
        for (i, v) in example.iter() {
            let scaled = (v * cast::<T>(255.0)).to_f64().unwrap_or(f64::NAN);
            let byte = scaled.round();
            if !(0.0..=255.0).contains(&byte) || (scaled - byte).abs() > 1e-9 {
                return Err(DataError::InvalidParameters {
                    reason: format!("example {n} value {scaled}/255 is not byte-representable"),
                });
            }
            pixels[i] = byte as u8;
        }
        buf.extend_from_slice(&pixels);
    }
    fs::write(path, buf)?;
    Ok(())
}

pub(crate) fn write_labels(path: &Path, labels: &[u8]) -> Result<(), DataError> {
    let mut buf = Vec::with_capacity(8 + labels.len());
    buf.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    buf.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    buf.extend_from_slice(labels);
    fs::write(path, buf)?;
    Ok(())
}
