//! Little-endian helpers for the binary model and descriptor files.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub(crate) struct Writer<W: Write> {
    inner: W,
}

impl<W: Write> Writer<W> {
    pub fn new(inner: W) -> Self {
        Self { inner }
    }

    fn put(&mut self, bytes: &[u8]) -> Result<()> {
        self.inner
            .write_all(bytes)
            .map_err(|e| Error::Format(format!("write failed: {e}")))
    }

    pub fn bytes(&mut self, b: &[u8]) -> Result<()> {
        self.put(b)
    }

    pub fn u32(&mut self, v: u32) -> Result<()> {
        self.put(&v.to_le_bytes())
    }

    pub fn u64(&mut self, v: u64) -> Result<()> {
        self.put(&v.to_le_bytes())
    }

    pub fn f64(&mut self, v: f64) -> Result<()> {
        self.put(&v.to_le_bytes())
    }

    pub fn f64s(&mut self, vs: &[f64]) -> Result<()> {
        let mut buf = Vec::with_capacity(vs.len() * 8);
        for v in vs {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        self.put(&buf)
    }

    pub fn str(&mut self, s: &str) -> Result<()> {
        self.u32(s.len() as u32)?;
        self.put(s.as_bytes())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner
            .flush()
            .map_err(|e| Error::Format(format!("flush failed: {e}")))?;
        Ok(self.inner)
    }
}

pub(crate) struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    pub fn new(inner: R) -> Self {
        Self { inner }
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|_| Error::Format("unexpected end of file".into()))?;
        Ok(buf)
    }

    pub fn magic(&mut self, expected: &[u8]) -> Result<()> {
        let mut buf = vec![0u8; expected.len()];
        self.inner
            .read_exact(&mut buf)
            .map_err(|_| Error::Format("unexpected end of file".into()))?;
        if buf != expected {
            return Err(Error::Format(format!(
                "bad magic: expected {:?}",
                String::from_utf8_lossy(expected)
            )));
        }
        Ok(())
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    pub fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Format("length overflows usize".into()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    pub fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let len = n.checked_mul(8).ok_or_else(|| Error::Format("length overflow".into()))?;
        let mut buf = Vec::new();
        (&mut self.inner)
            .take(len as u64)
            .read_to_end(&mut buf)
            .map_err(|e| Error::Format(format!("read failed: {e}")))?;
        if buf.len() != len {
            return Err(Error::Format("unexpected end of file".into()));
        }
        Ok(buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect())
    }

    pub fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let mut buf = Vec::new();
        (&mut self.inner)
            .take(n as u64)
            .read_to_end(&mut buf)
            .map_err(|e| Error::Format(format!("read failed: {e}")))?;
        if buf.len() != n {
            return Err(Error::Format("unexpected end of file".into()));
        }
        String::from_utf8(buf).map_err(|_| Error::Format("invalid utf-8 string".into()))
    }

    /// Errors unless the stream is exhausted.
    pub fn end(mut self) -> Result<()> {
        let mut probe = [0u8; 1];
        match self.inner.read(&mut probe) {
            Ok(0) => Ok(()),
            _ => Err(Error::Format("trailing bytes".into())),
        }
    }
}

/// Header + row-block layout shared by the PCA model and the codebook:
/// 8-byte magic, `u64` dim, `u64` row count, then `extra_rows + count`
/// rows of `dim` little-endian f64.
pub(crate) fn write_matrix_block(magic: &[u8; 8], dim: usize, count: usize, rows: &[&[f64]]) -> Result<Vec<u8>> {
    let mut w = Writer::new(Vec::new());
    w.bytes(magic)?;
    w.u64(dim as u64)?;
    w.u64(count as u64)?;
    for row in rows {
        debug_assert_eq!(row.len(), dim);
        w.f64s(row)?;
    }
    w.finish()
}

pub(crate) fn read_matrix_block(bytes: &[u8], magic: &[u8; 8], extra_rows: usize) -> Result<(usize, usize, Vec<Vec<f64>>)> {
    let mut r = Reader::new(bytes);
    r.magic(magic)?;
    let dim = r.usize()?;
    let count = r.usize()?;
    if dim == 0 {
        return Err(Error::Format("zero dimension".into()));
    }
    let rows = (0..count + extra_rows)
        .map(|_| r.f64s(dim))
        .collect::<Result<Vec<_>>>()?;
    r.end()?;
    Ok((dim, count, rows))
}
