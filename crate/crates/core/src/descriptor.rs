//! Descriptor families and the on-disk descriptor formats.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorMethod {
    /// 3D shape context over the raw point cloud.
    Sc3d,
    /// 2D shape contexts on the xy, yt and xt projections, concatenated.
    Psc3d,
    Dft,
    Dct,
    Dwt,
    /// Concatenated 3D brightness gradients.
    Grad3d,
    /// Magnitude-weighted histogram of gradient ratios.
    Hog,
    /// Correlogram of oriented gradients.
    Cog,
}

impl DescriptorMethod {
    pub const ALL: [DescriptorMethod; 8] = [
        Self::Sc3d,
        Self::Psc3d,
        Self::Dft,
        Self::Dct,
        Self::Dwt,
        Self::Grad3d,
        Self::Hog,
        Self::Cog,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sc3d => "sc3d",
            Self::Psc3d => "psc3d",
            Self::Dft => "dft",
            Self::Dct => "dct",
            Self::Dwt => "dwt",
            Self::Grad3d => "grad3d",
            Self::Hog => "hog",
            Self::Cog => "cog",
        }
    }

    /// Shape-context methods describe the point cloud, not the cuboids.
    pub fn is_structural(self) -> bool {
        matches!(self, Self::Sc3d | Self::Psc3d)
    }
}

impl fmt::Display for DescriptorMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DescriptorMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown descriptor method '{s}'")))
    }
}

/// Fixed-length feature vector tagged with the family that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    pub method: DescriptorMethod,
    pub values: Vec<f64>,
}

impl Descriptor {
    pub fn new(method: DescriptorMethod, values: Vec<f64>) -> Self {
        Self { method, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

const DESCRIPTOR_MAGIC: &[u8; 4] = b"STDF";

/// Encodes descriptor rows: 16-byte header (`STDF`, u32 dim, u64 count)
/// followed by `count * dim` little-endian f64.
pub fn encode_descriptors(dim: usize, rows: &[Vec<f64>]) -> Result<Vec<u8>> {
    let dim32 = u32::try_from(dim).map_err(|_| Error::invalid("descriptor dimension too large"))?;
    let mut w = Writer::new(Vec::with_capacity(16 + rows.len() * dim * 8));
    w.bytes(DESCRIPTOR_MAGIC)?;
    w.u32(dim32)?;
    w.u64(rows.len() as u64)?;
    for row in rows {
        if row.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: row.len() });
        }
        w.f64s(row)?;
    }
    w.finish()
}

pub fn decode_descriptors(bytes: &[u8]) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut r = Reader::new(bytes);
    r.magic(DESCRIPTOR_MAGIC)?;
    let dim = r.u32()? as usize;
    let count = r.usize()?;
    let rows = (0..count).map(|_| r.f64s(dim)).collect::<Result<Vec<_>>>()?;
    r.end()?;
    Ok((dim, rows))
}

pub fn write_descriptor_file(path: &Path, dim: usize, rows: &[Vec<f64>]) -> Result<()> {
    let bytes = encode_descriptors(dim, rows)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_descriptor_file(path: &Path) -> Result<(usize, Vec<Vec<f64>>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_descriptors(&bytes)
}

/// One descriptor per CSV row, no header.
pub fn write_descriptor_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
