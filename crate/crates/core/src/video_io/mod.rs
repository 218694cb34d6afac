//! Frame-sequence ingestion, dataset manifests and the synthetic test videos.

mod manifest;
mod synthetic;
mod y4m;

use std::fs;
use std::path::{Path, PathBuf};

use image::DynamicImage;

use crate::error::{Error, Result};

pub use manifest::{split_kth, DatasetManifest, ManifestEntry, Split};
pub use synthetic::{generate_synthetic_sequence, BlobMotion, SyntheticKind};

/// Grayscale intensity block over (x, y, t), values in [0, 1].
///
/// Storage is x-fastest, then y, then t.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoVolume {
    width: usize,
    height: usize,
    frames: usize,
    data: Vec<f64>,
}

impl VideoVolume {
    pub fn new(width: usize, height: usize, frames: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || frames == 0 {
            return Err(Error::invalid(format!(
                "volume dimensions must be positive, got {width}x{height}x{frames}"
            )));
        }
        let expected = width * height * frames;
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: data.len() });
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Self { width, height, frames, data })
    }

    pub fn filled(width: usize, height: usize, frames: usize, value: f64) -> Result<Self> {
        Self::new(width, height, frames, vec![value; width * height * frames])
    }

    /// Builds a volume from a function of (x, y, t).
    pub fn from_fn(
        width: usize,
        height: usize,
        frames: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * frames);
        for t in 0..frames {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(x, y, t));
                }
            }
        }
        Self::new(width, height, frames, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.frames)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, t: usize) -> usize {
        (t * self.height + y) * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, t: usize) -> f64 {
        self.data[self.index(x, y, t)]
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.data[t * n..(t + 1) * n]
    }
}

/// Loads a sequence from a locator: a directory of numbered frames, a Y4M
/// file, a single image, or a `synthetic:` URI (see [`parse_synthetic_uri`]).
pub fn load_source(locator: &str, max_frames: usize) -> Result<VideoVolume> {
    if let Some(rest) = locator.strip_prefix("synthetic:") {
        let (kind, w, h, f, seed) = parse_synthetic_uri(rest)?;
        let vol = generate_synthetic_sequence(kind, w, h, f, seed)?;
        return truncate_frames(vol, max_frames);
    }
    load_frame_sequence(Path::new(locator), max_frames)
}

/// Parses `<kind>:<W>x<H>x<F>:<seed>`.
pub fn parse_synthetic_uri(s: &str) -> Result<(SyntheticKind, usize, usize, usize, u64)> {
    let bad = || Error::invalid(format!("malformed synthetic locator '{s}'"));
    let mut parts = s.split(':');
    let kind: SyntheticKind = parts.next().ok_or_else(bad)?.parse()?;
    let dims: Vec<usize> = parts
        .next()
        .ok_or_else(bad)?
        .split('x')
        .map(|d| d.parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let seed = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if dims.len() != 3 || parts.next().is_some() {
        return Err(bad());
    }
    Ok((kind, dims[0], dims[1], dims[2], seed))
}

fn truncate_frames(vol: VideoVolume, max_frames: usize) -> Result<VideoVolume> {
    if max_frames == 0 {
        return Err(Error::invalid("max_frames must be positive"));
    }
    if vol.frames <= max_frames {
        return Ok(vol);
    }
    let n = vol.width * vol.height * max_frames;
    let mut data = vol.data;
    data.truncate(n);
    VideoVolume::new(vol.width, vol.height, max_frames, data)
}

const FRAME_EXTENSIONS: [&str; 4] = ["pgm", "ppm", "pnm", "png"];

/// Loads the first `min(max_frames, available)` frames from `path`.
///
/// Color frames are converted with the unweighted mean (R+G+B)/3; 8-bit
/// samples are scaled by 1/255.
pub fn load_frame_sequence(path: &Path, max_frames: usize) -> Result<VideoVolume> {
    if max_frames == 0 {
        return Err(Error::invalid("max_frames must be positive"));
    }
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_dir() {
        let files = numbered_frames(path)?;
        if files.is_empty() {
            return Err(Error::invalid(format!("no frames found in {}", path.display())));
        }
        let mut width = 0;
        let mut height = 0;
        let mut data = Vec::new();
        let mut frames = 0;
        for file in files.iter().take(max_frames) {
            let (w, h, pixels) = read_gray_image(file)?;
            if frames == 0 {
                width = w;
                height = h;
            } else if (w, h) != (width, height) {
                return Err(Error::invalid(format!(
                    "frame {} is {w}x{h}, expected {width}x{height}",
                    file.display()
                )));
            }
            data.extend(pixels);
            frames += 1;
        }
        VideoVolume::new(width, height, frames, data)
    } else if has_extension(path, "y4m") {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        y4m::decode(&bytes, max_frames)
    } else {
        let (w, h, pixels) = read_gray_image(path)?;
        VideoVolume::new(w, h, 1, pixels)
    }
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Frame files in a directory, ordered by the last run of digits in the name.
fn numbered_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.is_file() && FRAME_EXTENSIONS.iter().any(|ext| has_extension(&p, ext)) {
            files.push(p);
        }
    }
    files.sort_by_cached_key(|p| {
        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_owned();
        (frame_number(&stem), stem)
    });
    Ok(files)
}

fn frame_number(stem: &str) -> Option<u64> {
    let end = stem.rfind(|c: char| c.is_ascii_digit())? + 1;
    let start = stem[..end]
        .rfind(|c: char| !c.is_ascii_digit())
        .map_or(0, |i| i + 1);
    stem[start..end].parse().ok()
}

fn read_gray_image(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let img = image::open(path).map_err(|source| Error::Image { path: path.into(), source })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(buf) => {
            buf.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect()
        }
        DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLumaA16(_) => img
            .to_luma16()
            .into_raw()
            .into_iter()
            .map(|v| v as f64 / 65535.0)
            .collect(),
        DynamicImage::ImageRgb16(_) | DynamicImage::ImageRgba16(_) => img
            .to_rgb16()
            .pixels()
            .map(|p| (p[0] as f64 + p[1] as f64 + p[2] as f64) / (3.0 * 65535.0))
            .collect(),
        _ => img
            .to_rgb8()
            .pixels()
            .map(|p| (p[0] as f64 + p[1] as f64 + p[2] as f64) / (3.0 * 255.0))
            .collect(),
    };
    Ok((w, h, pixels))
}

/// Writes every frame as an 8-bit binary PGM (`frame_00000.pgm`, ...).
/// Intensities are quantized with `round(v * 255)`.
pub fn write_pgm_frames(volume: &VideoVolume, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for t in 0..volume.frames {
        let raw: Vec<u8> = volume.frame(t).iter().map(|&v| quantize_u8(v)).collect();
        let buf = image::GrayImage::from_raw(volume.width as u32, volume.height as u32, raw)
            .expect("frame buffer matches dimensions");
        let path = dir.join(format!("frame_{t:05}.pgm"));
        buf.save_with_format(&path, image::ImageFormat::Pnm)
            .map_err(|source| Error::Image { path, source })?;
    }
    Ok(())
}

pub fn quantize_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}
