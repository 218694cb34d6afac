//! Minimal uncompressed YUV4MPEG2 reader. Only the luma plane is kept.

use super::VideoVolume;
use crate::error::{Error, Result};

const MAGIC: &[u8] = b"YUV4MPEG2";

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(format!("y4m: {}", msg.into()))
}

fn read_line(bytes: &[u8], pos: &mut usize) -> Result<String> {
    let rest = &bytes[*pos..];
    let end = rest.iter().position(|&b| b == b'\n').ok_or_else(|| bad("unterminated line"))?;
    let line = std::str::from_utf8(&rest[..end]).map_err(|_| bad("non-ascii header"))?;
    *pos += end + 1;
    Ok(line.to_owned())
}

/// Bytes of chroma data following each luma plane for a colorspace tag.
fn chroma_len(tag: &str, w: usize, h: usize) -> Result<usize> {
    let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
    match tag {
        "420" | "420jpeg" | "420paldv" | "420mpeg2" => Ok(2 * cw * ch),
        "422" => Ok(2 * cw * h),
        "444" => Ok(2 * w * h),
        "444alpha" => Ok(3 * w * h),
        "mono" => Ok(0),
        other => Err(bad(format!("unsupported colorspace C{other}"))),
    }
}

pub(super) fn decode(bytes: &[u8], max_frames: usize) -> Result<VideoVolume> {
    let mut pos = 0;
    let header = read_line(bytes, &mut pos)?;
    let mut fields = header.split(' ');
    if fields.next().map(str::as_bytes) != Some(MAGIC) {
        return Err(bad("missing YUV4MPEG2 signature"));
    }
    let (mut w, mut h, mut colorspace) = (0usize, 0usize, "420".to_owned());
    for field in fields.filter(|f| !f.is_empty()) {
        let (key, value) = field.split_at(1);
        match key {
            "W" => w = value.parse().map_err(|_| bad("bad width"))?,
            "H" => h = value.parse().map_err(|_| bad("bad height"))?,
            "C" => colorspace = value.to_owned(),
            _ => {}
        }
    }
    if w == 0 || h == 0 {
        return Err(bad("missing frame dimensions"));
    }
    let chroma = chroma_len(&colorspace, w, h)?;
    let luma = w * h;

    let mut data = Vec::new();
    let mut frames = 0;
    while pos < bytes.len() && frames < max_frames {
        let marker = read_line(bytes, &mut pos)?;
        if !marker.starts_with("FRAME") {
            return Err(bad("expected FRAME marker"));
        }
        let plane = bytes
            .get(pos..pos + luma)
            .ok_or_else(|| bad("truncated frame"))?;
        data.extend(plane.iter().map(|&v| v as f64 / 255.0));
        pos += luma + chroma;
        if pos > bytes.len() {
            return Err(bad("truncated chroma"));
        }
        frames += 1;
    }
    if frames == 0 {
        return Err(bad("stream has no frames"));
    }
    VideoVolume::new(w, h, frames, data)
}
