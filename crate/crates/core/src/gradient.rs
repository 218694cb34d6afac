//! 3D brightness gradients of cuboids and the descriptors built on them:
//! plain concatenation, the gradient-ratio histogram (HOG) and the
//! correlogram of oriented gradients (COG).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::descriptor::{Descriptor, DescriptorMethod};
use crate::detector::Cuboid;
use crate::error::{Error, Result};
use crate::grid::Grid3;

#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub gx: Grid3,
    pub gy: Grid3,
    pub gt: Grid3,
    pub magnitude: Grid3,
}

impl GradientField {
    /// Builds a field from its three channels; magnitude is derived.
    pub fn from_components(gx: Grid3, gy: Grid3, gt: Grid3) -> Result<Self> {
        if gx.dims() != gy.dims() || gx.dims() != gt.dims() {
            return Err(Error::invalid("gradient channels must share dimensions"));
        }
        let mag = gx
            .data()
            .iter()
            .zip(gy.data())
            .zip(gt.data())
            .map(|((a, b), c)| (a * a + b * b + c * c).sqrt())
            .collect();
        let magnitude = Grid3::new(gx.dims(), mag)?;
        Ok(Self { gx, gy, gt, magnitude })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.gx.dims()
    }

    pub fn len(&self) -> usize {
        self.gx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gx.is_empty()
    }
}

/// Derivative along one axis: central differences inside, one-sided at the faces.
fn axis_difference(values: &Grid3, axis: usize) -> Grid3 {
    let dims = values.dims();
    let n = [dims.0, dims.1, dims.2][axis];
    Grid3::from_fn(dims, |x, y, t| {
        let mut at = [x, y, t];
        let i = at[axis];
        let (lo, hi, scale) = if i == 0 {
            (0, 1, 1.0)
        } else if i == n - 1 {
            (n - 2, n - 1, 1.0)
        } else {
            (i - 1, i + 1, 0.5)
        };
        at[axis] = hi;
        let f_hi = values.get(at[0], at[1], at[2]);
        at[axis] = lo;
        let f_lo = values.get(at[0], at[1], at[2]);
        (f_hi - f_lo) * scale
    })
}

pub fn gradient3d_grid(values: &Grid3) -> Result<GradientField> {
    let (w, h, d) = values.dims();
    if w < 3 || h < 3 || d < 3 {
        return Err(Error::invalid(format!("gradient needs every side >= 3, got {w}x{h}x{d}")));
    }
    GradientField::from_components(axis_difference(values, 0), axis_difference(values, 1), axis_difference(values, 2))
}

pub fn gradient3d(cuboid: &Cuboid) -> Result<GradientField> {
    gradient3d_grid(&cuboid.values)
}

/// `[gx; gy; gt]`, each flattened x-fastest.
pub fn gradient_concat_descriptor(cuboid: &Cuboid) -> Result<Descriptor> {
    let g = gradient3d(cuboid)?;
    let mut values = Vec::with_capacity(3 * g.len());
    values.extend_from_slice(g.gx.data());
    values.extend_from_slice(g.gy.data());
    values.extend_from_slice(g.gt.data());
    Ok(Descriptor::new(DescriptorMethod::Grad3d, values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioParams {
    /// Intervals per ratio axis.
    pub partitions: usize,
    /// Largest Chebyshev distance in the correlogram.
    pub d_max: usize,
    /// Voxels with `|gx| < epsilon` are excluded.
    pub epsilon: f64,
}

impl Default for RatioParams {
    fn default() -> Self {
        Self { partitions: 10, d_max: 3, epsilon: 1e-6 }
    }
}

impl RatioParams {
    pub fn validate(&self) -> Result<()> {
        if self.partitions < 2 || self.d_max < 1 || !(self.epsilon >= 0.0) {
            return Err(Error::invalid(format!(
                "ratio params need partitions >= 2, d_max >= 1, epsilon >= 0; got {self:?}"
            )));
        }
        Ok(())
    }

    /// Number of joint (ry, rt) bins.
    pub fn combined_bins(&self) -> usize {
        self.partitions * self.partitions
    }

    pub fn hog_len(&self) -> usize {
        self.combined_bins()
    }

    pub fn cog_len(&self) -> usize {
        self.combined_bins() * self.combined_bins() * self.d_max
    }

    fn axis_bin(&self, v: f64) -> usize {
        ((v * self.partitions as f64).floor() as usize).min(self.partitions - 1)
    }
}

/// Maps an unbounded ratio into (0, 1) monotonically.
pub fn normalize_ratio(r: f64) -> f64 {
    r.atan() / PI + 0.5
}

/// Normalized `gy/gx` and `gt/gx` per voxel; `mask[i]` is false where
/// the reference gradient is too small.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioChannels {
    pub ry: Vec<f64>,
    pub rt: Vec<f64>,
    pub mask: Vec<bool>,
}

pub fn ratio_channels(field: &GradientField, params: &RatioParams) -> RatioChannels {
    let n = field.len();
    let mut out = RatioChannels { ry: vec![0.0; n], rt: vec![0.0; n], mask: vec![false; n] };
    for i in 0..n {
        let gx = field.gx.data()[i];
        if gx.abs() < params.epsilon || gx == 0.0 {
            continue;
        }
        out.ry[i] = normalize_ratio(field.gy.data()[i] / gx);
        out.rt[i] = normalize_ratio(field.gt.data()[i] / gx);
        out.mask[i] = true;
    }
    out
}

/// Joint ratio bin per voxel (`ry_bin * partitions + rt_bin`), `None` if masked.
pub fn combined_bins(field: &GradientField, params: &RatioParams) -> Vec<Option<usize>> {
    let ch = ratio_channels(field, params);
    (0..field.len())
        .map(|i| ch.mask[i].then(|| params.axis_bin(ch.ry[i]) * params.partitions + params.axis_bin(ch.rt[i])))
        .collect()
}

pub fn hog_from_gradients(field: &GradientField, params: &RatioParams) -> Result<Vec<f64>> {
    params.validate()?;
    let mut hist = vec![0.0; params.hog_len()];
    for (bin, &m) in combined_bins(field, params).into_iter().zip(field.magnitude.data()) {
        if let Some(b) = bin {
            hist[b] += m;
        }
    }
    Ok(hist)
}

pub fn hog_ratio_descriptor(cuboid: &Cuboid, params: &RatioParams) -> Result<Descriptor> {
    let g = gradient3d(cuboid)?;
    Ok(Descriptor::new(DescriptorMethod::Hog, hog_from_gradients(&g, params)?))
}

/// Entry `(i, j, k)` sums the magnitude of every voxel in bin `i` that has a
/// voxel of bin `j` at Chebyshev distance exactly `k`, once per such pair.
/// Flattened i-major, then j, then k.
pub fn cog_from_gradients(field: &GradientField, params: &RatioParams) -> Result<Vec<f64>> {
    params.validate()?;
    let bins = combined_bins(field, params);
    let nb = params.combined_bins();
    let d_max = params.d_max as i64;
    let (w, h, d) = field.dims();
    let (w, h, d) = (w as i64, h as i64, d as i64);
    let mags = field.magnitude.data();
    let mut table = vec![0.0; params.cog_len()];
    for (u, bin_u) in bins.iter().enumerate() {
        let Some(i) = *bin_u else { continue };
        let (x, y, t) = field.magnitude.coords(u);
        let (x, y, t) = (x as i64, y as i64, t as i64);
        // offsets walk (t, y, x) ascending so partner voxels are visited in index order
        for dt in -d_max..=d_max {
            let vt = t + dt;
            if vt < 0 || vt >= d {
                continue;
            }
            for dy in -d_max..=d_max {
                let vy = y + dy;
                if vy < 0 || vy >= h {
                    continue;
                }
                for dx in -d_max..=d_max {
                    let vx = x + dx;
                    if vx < 0 || vx >= w {
                        continue;
                    }
                    let k = dx.abs().max(dy.abs()).max(dt.abs());
                    if k == 0 {
                        continue;
                    }
                    let v = ((vt * h + vy) * w + vx) as usize;
                    if let Some(j) = bins[v] {
                        table[(i * nb + j) * params.d_max + (k as usize - 1)] += mags[u];
                    }
                }
            }
        }
    }
    Ok(table)
}

pub fn cog_descriptor(cuboid: &Cuboid, params: &RatioParams) -> Result<Descriptor> {
    let g = gradient3d(cuboid)?;
    Ok(Descriptor::new(DescriptorMethod::Cog, cog_from_gradients(&g, params)?))
}
