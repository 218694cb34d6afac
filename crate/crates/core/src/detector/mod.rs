//! Periodic-motion interest point detector: spatial Gaussian smoothing,
//! temporal Gabor quadrature energy, strict local maxima and cuboid cutting.

mod filters;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::video_io::VideoVolume;

pub use filters::{convolve_spatial, convolve_temporal, gabor_quadrature_pair, gaussian_kernel, Kernel1d};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Spatial scale in pixels.
    pub sigma: f64,
    /// Temporal scale in frames.
    pub tau: f64,
    /// Maximum number of interest points kept per sequence.
    pub n_points: usize,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self { sigma: 2.5, tau: 1.5, n_points: 100 }
    }
}

impl DetectorParams {
    pub fn new(sigma: f64, tau: f64, n_points: usize) -> Result<Self> {
        let p = Self { sigma, tau, n_points };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.tau > 0.0) || !self.sigma.is_finite() || !self.tau.is_finite() {
            return Err(Error::invalid(format!(
                "detector scales must be positive, got sigma={} tau={}",
                self.sigma, self.tau
            )));
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        4.0 / self.tau
    }

    pub fn spatial_half(&self) -> usize {
        (3.0 * self.sigma).round() as usize
    }

    pub fn temporal_half(&self) -> usize {
        (3.0 * self.tau).round() as usize
    }

    /// Cuboid dimensions `(w_s, w_s, w_t)`.
    pub fn cuboid_dims(&self) -> (usize, usize, usize) {
        let s = 2 * self.spatial_half() + 1;
        (s, s, 2 * self.temporal_half() + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterestPoint {
    pub x: usize,
    pub y: usize,
    pub t: usize,
    pub response: f64,
}

impl InterestPoint {
    pub fn position(&self) -> [f64; 3] {
        [self.x as f64, self.y as f64, self.t as f64]
    }
}

/// Detected points, sorted by descending response.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<InterestPoint>,
    pub dims: (usize, usize, usize),
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "y", "t", "response"])?;
        for p in &self.points {
            w.write_record([p.x.to_string(), p.y.to_string(), p.t.to_string(), format!("{:e}", p.response)])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &std::path::Path, dims: (usize, usize, usize)) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let points = r.deserialize().collect::<std::result::Result<Vec<InterestPoint>, _>>()?;
        Ok(Self { points, dims })
    }
}

/// Windowed block of raw intensities around an interest point.
#[derive(Debug, Clone, PartialEq)]
pub struct Cuboid {
    pub center: InterestPoint,
    pub values: Grid3,
}

impl Cuboid {
    pub fn dims(&self) -> (usize, usize, usize) {
        self.values.dims()
    }
}

/// Convolves each frame with a normalized separable Gaussian (radius `ceil(3 sigma)`).
pub fn gaussian_smooth_spatial(volume: &VideoVolume, sigma: f64) -> Result<VideoVolume> {
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma must be positive"));
    }
    let smoothed = convolve_spatial(&volume_grid(volume), &gaussian_kernel(sigma));
    let (w, h, f) = volume.dims();
    // a normalized kernel cannot leave [0, 1] except by rounding
    let data = smoothed.into_data().into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
    VideoVolume::new(w, h, f, data)
}

fn volume_grid(volume: &VideoVolume) -> Grid3 {
    Grid3::new(volume.dims(), volume.data().to_vec()).expect("volume dims are positive")
}

/// Quadrature energy `R = (I*g*h_ev)^2 + (I*g*h_od)^2`.
pub fn response_function(volume: &VideoVolume, params: &DetectorParams) -> Result<Grid3> {
    params.validate()?;
    let (w, h, f) = volume.dims();
    let (cw, ch, cf) = params.cuboid_dims();
    if w < cw || h < ch || f < cf {
        return Err(Error::invalid(format!(
            "volume {w}x{h}x{f} smaller than cuboid {cw}x{ch}x{cf}"
        )));
    }
    let smoothed = convolve_spatial(&volume_grid(volume), &gaussian_kernel(params.sigma));
    let (even, odd) = gabor_quadrature_pair(params.tau);
    let re = convolve_temporal(&smoothed, &even);
    let ro = convolve_temporal(&smoothed, &odd);
    let data = re.data().iter().zip(ro.data()).map(|(a, b)| a * a + b * b).collect();
    Grid3::new(volume.dims(), data)
}

/// Whether `R(x, y, t)` exceeds every existing 26-neighbour.
pub fn is_strict_local_max(response: &Grid3, x: usize, y: usize, t: usize) -> bool {
    let (w, h, f) = response.dims();
    let v = response.get(x, y, t);
    for dt in -1i64..=1 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 && dt == 0 {
                    continue;
                }
                let (nx, ny, nt) = (x as i64 + dx, y as i64 + dy, t as i64 + dt);
                if nx < 0 || ny < 0 || nt < 0 || nx >= w as i64 || ny >= h as i64 || nt >= f as i64 {
                    continue;
                }
                if response.get(nx as usize, ny as usize, nt as usize) >= v {
                    return false;
                }
            }
        }
    }
    true
}

/// Top-`n_points` strict local maxima of the response, restricted to
/// positions that admit a full cuboid. Ties order by (t, y, x).
pub fn detect_interest_points(response: &Grid3, params: &DetectorParams) -> PointCloud {
    let (w, h, f) = response.dims();
    let (sh, th) = (params.spatial_half(), params.temporal_half());
    let mut candidates = Vec::new();
    if w > 2 * sh && h > 2 * sh && f > 2 * th {
        for t in th..f - th {
            for y in sh..h - sh {
                for x in sh..w - sh {
                    let r = response.get(x, y, t);
                    if r > 0.0 && is_strict_local_max(response, x, y, t) {
                        candidates.push(InterestPoint { x, y, t, response: r });
                    }
                }
            }
        }
    }
    // candidates are generated in (t, y, x) order, so a stable sort keeps that as the tie rule
    candidates.sort_by(|a, b| b.response.total_cmp(&a.response));
    candidates.truncate(params.n_points);
    PointCloud { points: candidates, dims: response.dims() }
}

/// Cuts the `(2 round(3 sigma)+1)^2 x (2 round(3 tau)+1)` block of raw
/// intensities centered at `point`.
pub fn extract_cuboid(volume: &VideoVolume, point: &InterestPoint, params: &DetectorParams) -> Result<Cuboid> {
    let (sh, th) = (params.spatial_half(), params.temporal_half());
    let (w, h, f) = volume.dims();
    let fits = point.x >= sh && point.x + sh < w && point.y >= sh && point.y + sh < h && point.t >= th && point.t + th < f;
    if !fits {
        return Err(Error::invalid(format!(
            "point ({}, {}, {}) too close to the border for a cuboid",
            point.x, point.y, point.t
        )));
    }
    let (x0, y0, t0) = (point.x - sh, point.y - sh, point.t - th);
    let values = Grid3::from_fn(params.cuboid_dims(), |x, y, t| volume.get(x0 + x, y0 + y, t0 + t));
    Ok(Cuboid { center: *point, values })
}

/// Full detection stage: response, maxima and cuboids in descending-response order.
pub fn detect(volume: &VideoVolume, params: &DetectorParams) -> Result<(PointCloud, Vec<Cuboid>)> {
    let response = response_function(volume, params)?;
    let cloud = detect_interest_points(&response, params);
    let cuboids = cloud
        .points
        .iter()
        .map(|p| extract_cuboid(volume, p, params))
        .collect::<Result<Vec<_>>>()?;
    Ok((cloud, cuboids))
}
