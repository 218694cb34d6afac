//! Frequency-domain cuboid descriptors: DFT magnitudes, DCT or Daubechies
//! wavelet coefficients of the three central orthogonal planes.

mod dct;
mod dft;
mod dwt;
mod zigzag;

use serde::{Deserialize, Serialize};

use crate::descriptor::{Descriptor, DescriptorMethod};
use crate::detector::Cuboid;
use crate::error::{Error, Result};
use crate::grid::Grid2;

pub use dct::{dct2, idct2};
pub use dft::{dft2, idft2, ComplexGrid};
pub use dwt::{dwt2, idwt2_periodic, output_len, reflect, Daubechies, DetailBands, Extension, Subbands};
pub use zigzag::{zigzag_order, zigzag_take};

/// The xy, yt and xt slices through the cuboid center.
///
/// `xy` is indexed (x, y), `yt` is (y, t) and `xt` is (x, t).
#[derive(Debug, Clone, PartialEq)]
pub struct CuboidPlanes {
    pub xy: Grid2,
    pub yt: Grid2,
    pub xt: Grid2,
}

impl CuboidPlanes {
    pub fn in_order(&self) -> [&Grid2; 3] {
        [&self.xy, &self.yt, &self.xt]
    }
}

pub fn extract_orthogonal_planes(cuboid: &Cuboid) -> Result<CuboidPlanes> {
    let (w, h, d) = cuboid.dims();
    if w % 2 == 0 || h % 2 == 0 || d % 2 == 0 {
        return Err(Error::invalid(format!("cuboid sides must be odd, got {w}x{h}x{d}")));
    }
    let (cx, cy, ct) = (w / 2, h / 2, d / 2);
    let v = &cuboid.values;
    Ok(CuboidPlanes {
        xy: Grid2::from_fn(w, h, |x, y| v.get(x, y, ct)),
        yt: Grid2::from_fn(h, d, |y, t| v.get(cx, y, t)),
        xt: Grid2::from_fn(w, d, |x, t| v.get(x, cy, t)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformMethod {
    Dft,
    Dct,
    Dwt,
}

impl TransformMethod {
    pub fn default_budget(self) -> usize {
        match self {
            Self::Dft | Self::Dct => 192,
            Self::Dwt => 96,
        }
    }

    pub fn descriptor_method(self) -> DescriptorMethod {
        match self {
            Self::Dft => DescriptorMethod::Dft,
            Self::Dct => DescriptorMethod::Dct,
            Self::Dwt => DescriptorMethod::Dwt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformParams {
    pub method: TransformMethod,
    pub per_plane_budget: usize,
    pub dwt_levels: usize,
    pub dwt_family: Daubechies,
}

impl TransformParams {
    pub fn new(method: TransformMethod) -> Self {
        Self {
            method,
            per_plane_budget: method.default_budget(),
            dwt_levels: 2,
            dwt_family: Daubechies::D4,
        }
    }

    pub fn descriptor_len(&self) -> usize {
        3 * self.per_plane_budget
    }
}

/// Transform output of one plane, before truncation.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Dft(ComplexGrid),
    Dct(Grid2),
    Dwt(Subbands),
}

impl Coefficients {
    pub fn count(&self) -> usize {
        match self {
            Self::Dft(c) => c.data.len(),
            Self::Dct(g) => g.len(),
            Self::Dwt(s) => s.coefficient_count(),
        }
    }
}

pub fn transform_plane(plane: &Grid2, params: &TransformParams) -> Result<Coefficients> {
    Ok(match params.method {
        TransformMethod::Dft => Coefficients::Dft(dft2(plane)),
        TransformMethod::Dct => Coefficients::Dct(dct2(plane)),
        TransformMethod::Dwt => Coefficients::Dwt(dwt2(plane, params.dwt_levels, params.dwt_family, Extension::Symmetric)?),
    })
}

/// Keeps `budget` leading coefficients: DFT magnitudes and DCT values in
/// zigzag order, wavelet coefficients in subband order (LL first, details
/// coarse to fine, row-major within a band).
pub fn truncate_coefficients(coeffs: &Coefficients, budget: usize) -> Result<Vec<f64>> {
    match coeffs {
        Coefficients::Dft(c) => zigzag_take(&c.magnitudes(), c.width, c.height, budget),
        Coefficients::Dct(g) => zigzag_take(g.data(), g.width(), g.height(), budget),
        Coefficients::Dwt(s) => {
            let flat = s.flatten();
            if budget > flat.len() {
                return Err(Error::invalid(format!(
                    "coefficient budget {budget} exceeds the {} available",
                    flat.len()
                )));
            }
            Ok(flat[..budget].to_vec())
        }
    }
}

/// Concatenates the truncated xy, yt and xt coefficients.
///
/// A plane with fewer coefficients than the budget contributes all of them
/// followed by zeros, so every plane occupies exactly `per_plane_budget`
/// slots. At the default geometry this affects the 17x11 temporal planes
/// (187 coefficients) under the 192 DFT/DCT budget.
pub fn transform_descriptor(cuboid: &Cuboid, params: &TransformParams) -> Result<Descriptor> {
    if params.per_plane_budget == 0 {
        return Err(Error::invalid("per-plane coefficient budget must be positive"));
    }
    let planes = extract_orthogonal_planes(cuboid)?;
    let mut values = Vec::with_capacity(params.descriptor_len());
    for plane in planes.in_order() {
        let coeffs = transform_plane(plane, params)?;
        let take = params.per_plane_budget.min(coeffs.count());
        values.extend(truncate_coefficients(&coeffs, take)?);
        values.resize(values.len() + params.per_plane_budget - take, 0.0);
    }
    Ok(Descriptor::new(params.method.descriptor_method(), values))
}
