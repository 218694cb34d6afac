use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::VideoVolume;
use crate::error::{Error, Result};

/// Width of the Gaussian blob in pixels.
pub const BLOB_SIGMA: f64 = 3.0;
/// Oscillation period in frames.
pub const BLOB_PERIOD: usize = 16;
const MIN_BLOB_DIM: usize = 32;
const UNIFORM_LEVEL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    Uniform,
    OscillatingBlobH,
    OscillatingBlobV,
}

impl SyntheticKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::OscillatingBlobH => "oscillating_blob_h",
            Self::OscillatingBlobV => "oscillating_blob_v",
        }
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::Uniform, Self::OscillatingBlobH, Self::OscillatingBlobV]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown synthetic kind '{s}'")))
    }
}

/// Analytic blob trajectory. The seed picks the oscillation phase and a
/// small offset of the rest position across the motion axis.
#[derive(Debug, Clone, Copy)]
pub struct BlobMotion {
    pub horizontal: bool,
    pub width: usize,
    pub height: usize,
    pub phase: f64,
    pub cross_offset: f64,
}

impl BlobMotion {
    pub fn new(kind: SyntheticKind, width: usize, height: usize, seed: u64) -> Option<Self> {
        let horizontal = match kind {
            SyntheticKind::Uniform => return None,
            SyntheticKind::OscillatingBlobH => true,
            SyntheticKind::OscillatingBlobV => false,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase = rng.gen_range(0.0..2.0 * PI);
        let cross_offset = rng.gen_range(-2.0..=2.0);
        Some(Self { horizontal, width, height, phase, cross_offset })
    }

    /// Blob center (x, y) at frame `t`.
    pub fn center(&self, t: usize) -> (f64, f64) {
        // reduce modulo the period first so frames one period apart are bit-identical
        let cycle = (t % BLOB_PERIOD) as f64 / BLOB_PERIOD as f64;
        let swing = (2.0 * PI * cycle + self.phase).sin();
        let (cx, cy) = (self.width as f64 / 2.0, self.height as f64 / 2.0);
        if self.horizontal {
            (cx + self.width as f64 / 4.0 * swing, cy + self.cross_offset)
        } else {
            (cx + self.cross_offset, cy + self.height as f64 / 4.0 * swing)
        }
    }
}

pub fn generate_synthetic_sequence(
    kind: SyntheticKind,
    width: usize,
    height: usize,
    frames: usize,
    seed: u64,
) -> Result<VideoVolume> {
    let Some(motion) = BlobMotion::new(kind, width, height, seed) else {
        return VideoVolume::filled(width, height, frames, UNIFORM_LEVEL);
    };
    if width < MIN_BLOB_DIM || height < MIN_BLOB_DIM || frames < MIN_BLOB_DIM {
        return Err(Error::invalid(format!(
            "blob sequences need at least {MIN_BLOB_DIM}x{MIN_BLOB_DIM}x{MIN_BLOB_DIM}, got {width}x{height}x{frames}"
        )));
    }
    let centers: Vec<(f64, f64)> = (0..frames).map(|t| motion.center(t)).collect();
    let denom = 2.0 * BLOB_SIGMA * BLOB_SIGMA;
    VideoVolume::from_fn(width, height, frames, |x, y, t| {
        let (cx, cy) = centers[t];
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        (-(dx * dx + dy * dy) / denom).exp()
    })
}
