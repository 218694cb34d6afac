//! Log-polar (2D) and log-spherical (3D) shape-context histograms over
//! interest point clouds, plus the projected-plane variant.
//!
//! All distance tests run on squared distances, so integer-valued clouds
//! bin exactly and the histograms are bit-for-bit invariant to translation
//! and to power-of-two rescaling.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::descriptor::{Descriptor, DescriptorMethod};
use crate::detector::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadialSpacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeContextParams {
    pub n_radial: usize,
    /// Angular bins; in 3D applied to both the polar and the azimuth angle.
    pub n_angular: usize,
    pub radial_spacing: RadialSpacing,
}

impl Default for ShapeContextParams {
    fn default() -> Self {
        Self { n_radial: 10, n_angular: 16, radial_spacing: RadialSpacing::Log }
    }
}

impl ShapeContextParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_radial < 1 || self.n_angular < 2 {
            return Err(Error::invalid(format!(
                "shape context needs n_radial >= 1 and n_angular >= 2, got {} and {}",
                self.n_radial, self.n_angular
            )));
        }
        Ok(())
    }

    pub fn len_2d(&self) -> usize {
        self.n_radial * self.n_angular
    }

    pub fn len_3d(&self) -> usize {
        self.n_radial * self.n_angular * self.n_angular
    }

    /// Squared upper edges of the radial bins for a kernel of squared radius `radius_sq`.
    fn radial_edges_sq(&self, radius_sq: f64) -> Vec<f64> {
        let n = self.n_radial;
        match self.radial_spacing {
            // radius * 2^(b+1-n), squared: multiply by 1/4 per step (exact)
            RadialSpacing::Log => {
                let mut edges = vec![radius_sq; n];
                for b in (0..n.saturating_sub(1)).rev() {
                    edges[b] = edges[b + 1] * 0.25;
                }
                edges
            }
            RadialSpacing::Linear => (1..=n)
                .map(|b| radius_sq * (b * b) as f64 / (n * n) as f64)
                .collect(),
        }
    }
}

/// Histogram of point occurrences; 2D layout is radial x angular, 3D is
/// radial x polar x azimuth, flattened radial-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeContextHistogram {
    pub bins: Vec<u32>,
}

impl ShapeContextHistogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().map(|&b| b as u64).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.bins.iter().map(|&b| b as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Xy,
    Yt,
    Xt,
}

impl Plane {
    pub const ORDER: [Plane; 3] = [Plane::Xy, Plane::Yt, Plane::Xt];

    pub fn project(self, p: [f64; 3]) -> [f64; 2] {
        match self {
            Plane::Xy => [p[0], p[1]],
            Plane::Yt => [p[1], p[2]],
            Plane::Xt => [p[0], p[2]],
        }
    }
}

fn dist_sq<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn max_dist_sq<const D: usize>(points: &[[f64; D]]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Degenerate(format!("kernel radius needs at least 2 points, got {}", points.len())));
    }
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(dist_sq(a, b));
        }
    }
    if best <= 0.0 {
        return Err(Error::Degenerate("all points coincide; kernel radius is zero".into()));
    }
    Ok(best)
}

/// Maximum pairwise Euclidean distance.
pub fn kernel_radius<const D: usize>(points: &[[f64; D]]) -> Result<f64> {
    max_dist_sq(points).map(f64::sqrt)
}

fn radial_bin(d_sq: f64, edges_sq: &[f64]) -> Option<usize> {
    // lower bin wins on an exact edge
    edges_sq.iter().position(|&e| d_sq <= e)
}

fn angle_bin(angle: f64, full_turn: f64, n: usize) -> usize {
    ((n as f64 * angle / full_turn).floor() as usize).min(n - 1)
}

fn azimuth(dx: f64, dy: f64) -> f64 {
    let a = dy.atan2(dx);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

fn check_radius(radius_sq: f64) -> Result<()> {
    if !(radius_sq > 0.0) || !radius_sq.is_finite() {
        return Err(Error::Degenerate("shape context radius must be positive".into()));
    }
    Ok(())
}

fn sc2d_sq(points: &[[f64; 2]], reference: usize, params: &ShapeContextParams, radius_sq: f64) -> Result<ShapeContextHistogram> {
    params.validate()?;
    check_radius(radius_sq)?;
    let origin = *points
        .get(reference)
        .ok_or_else(|| Error::invalid(format!("reference index {reference} out of range")))?;
    let edges = params.radial_edges_sq(radius_sq);
    let mut bins = vec![0u32; params.len_2d()];
    for (i, q) in points.iter().enumerate() {
        if i == reference {
            continue;
        }
        let (dx, dy) = (q[0] - origin[0], q[1] - origin[1]);
        let Some(r) = radial_bin(dx * dx + dy * dy, &edges) else {
            continue;
        };
        let a = angle_bin(azimuth(dx, dy), 2.0 * PI, params.n_angular);
        bins[r * params.n_angular + a] += 1;
    }
    Ok(ShapeContextHistogram { bins })
}

fn sc3d_sq(points: &[[f64; 3]], reference: usize, params: &ShapeContextParams, radius_sq: f64) -> Result<ShapeContextHistogram> {
    params.validate()?;
    check_radius(radius_sq)?;
    let origin = *points
        .get(reference)
        .ok_or_else(|| Error::invalid(format!("reference index {reference} out of range")))?;
    let edges = params.radial_edges_sq(radius_sq);
    let n = params.n_angular;
    let mut bins = vec![0u32; params.len_3d()];
    for (i, q) in points.iter().enumerate() {
        if i == reference {
            continue;
        }
        let (dx, dy, dt) = (q[0] - origin[0], q[1] - origin[1], q[2] - origin[2]);
        let planar_sq = dx * dx + dy * dy;
        let Some(r) = radial_bin(planar_sq + dt * dt, &edges) else {
            continue;
        };
        let polar = angle_bin(planar_sq.sqrt().atan2(dt), PI, n);
        // azimuth is undefined on the t axis; pin it to bin 0
        let az = if planar_sq == 0.0 { 0 } else { angle_bin(azimuth(dx, dy), 2.0 * PI, n) };
        bins[(r * n + polar) * n + az] += 1;
    }
    Ok(ShapeContextHistogram { bins })
}

/// Largest squared distance whose square root does not exceed `radius`.
///
/// `radius * radius` alone can round below the square of a distance that
/// `sqrt` maps back to exactly `radius`.
fn inclusive_radius_sq(radius: f64) -> f64 {
    let mut s = radius * radius;
    if !s.is_finite() || s <= 0.0 {
        return s;
    }
    while s.next_up().sqrt() <= radius {
        s = s.next_up();
    }
    while s.sqrt() > radius {
        s = s.next_down();
    }
    s
}

/// 2D shape context of `points[reference]` within `radius`.
pub fn shape_context_2d(points: &[[f64; 2]], reference: usize, params: &ShapeContextParams, radius: f64) -> Result<ShapeContextHistogram> {
    sc2d_sq(points, reference, params, inclusive_radius_sq(radius))
}

/// 3D shape context over (x, y, t): polar angle from +t, azimuth in the x-y plane.
pub fn shape_context_3d(points: &[[f64; 3]], reference: usize, params: &ShapeContextParams, radius: f64) -> Result<ShapeContextHistogram> {
    sc3d_sq(points, reference, params, inclusive_radius_sq(radius))
}

pub fn cloud_positions(cloud: &PointCloud) -> Vec<[f64; 3]> {
    cloud.points.iter().map(|p| p.position()).collect()
}

/// Drops the axis orthogonal to `plane`; duplicates are kept.
pub fn project_points(points: &[[f64; 3]], plane: Plane) -> Result<Vec<[f64; 2]>> {
    if points.is_empty() {
        return Err(Error::invalid("cannot project an empty point cloud"));
    }
    Ok(points.iter().map(|&p| plane.project(p)).collect())
}

pub fn project_point_cloud(cloud: &PointCloud, plane: Plane) -> Result<Vec<[f64; 2]>> {
    project_points(&cloud_positions(cloud), plane)
}

/// Per-point concatenation of the xy, yt and xt shape contexts, each with
/// the kernel radius of its own projected set.
pub fn projected_sc_descriptors(points: &[[f64; 3]], params: &ShapeContextParams) -> Result<Vec<Descriptor>> {
    params.validate()?;
    let projections = Plane::ORDER
        .iter()
        .map(|&plane| {
            let proj = project_points(points, plane)?;
            let r_sq = max_dist_sq(&proj)
                .map_err(|e| Error::Degenerate(format!("{plane:?} projection: {e}")))?;
            Ok((proj, r_sq))
        })
        .collect::<Result<Vec<_>>>()?;
    (0..points.len())
        .map(|i| {
            let mut values = Vec::with_capacity(3 * params.len_2d());
            for (proj, r_sq) in &projections {
                values.extend(sc2d_sq(proj, i, params, *r_sq)?.to_f64());
            }
            Ok(Descriptor::new(DescriptorMethod::Psc3d, values))
        })
        .collect()
}

pub fn projected_3dsc_descriptors(cloud: &PointCloud, params: &ShapeContextParams) -> Result<Vec<Descriptor>> {
    projected_sc_descriptors(&cloud_positions(cloud), params)
}

/// Per-point flattened 3D shape context with the cloud's 3D kernel radius.
pub fn sc3d_point_descriptors(points: &[[f64; 3]], params: &ShapeContextParams) -> Result<Vec<Descriptor>> {
    params.validate()?;
    let r_sq = max_dist_sq(points)?;
    (0..points.len())
        .map(|i| Ok(Descriptor::new(DescriptorMethod::Sc3d, sc3d_sq(points, i, params, r_sq)?.to_f64())))
        .collect()
}

pub fn sc3d_descriptors(cloud: &PointCloud, params: &ShapeContextParams) -> Result<Vec<Descriptor>> {
    sc3d_point_descriptors(&cloud_positions(cloud), params)
}
