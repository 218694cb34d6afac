use std::f64::consts::PI;

use rayon::prelude::*;

use crate::grid::Grid3;

/// Odd-length 1D kernel sampled at integer offsets `-radius..=radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1d {
    taps: Vec<f64>,
}

impl Kernel1d {
    pub fn from_fn(radius: usize, f: impl Fn(f64) -> f64) -> Self {
        let r = radius as i64;
        Self { taps: (-r..=r).map(|t| f(t as f64)).collect() }
    }

    pub fn radius(&self) -> usize {
        self.taps.len() / 2
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Tap at signed offset `t`.
    pub fn at(&self, t: i64) -> f64 {
        self.taps[(t + self.radius() as i64) as usize]
    }
}

/// Normalized Gaussian with radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Kernel1d {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut k = Kernel1d::from_fn(radius, |t| (-t * t / (2.0 * sigma * sigma)).exp());
    let sum: f64 = k.taps.iter().sum();
    k.taps.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Even/odd temporal Gabor quadrature pair with `omega = 4 / tau`,
/// sampled on `[-ceil(3 tau), ceil(3 tau)]`.
pub fn gabor_quadrature_pair(tau: f64) -> (Kernel1d, Kernel1d) {
    let radius = (3.0 * tau).ceil() as usize;
    let omega = 4.0 / tau;
    let envelope = move |t: f64| (-t * t / (tau * tau)).exp();
    let even = Kernel1d::from_fn(radius, |t| -(2.0 * PI * t * omega).cos() * envelope(t));
    let odd = Kernel1d::from_fn(radius, |t| -(2.0 * PI * t * omega).sin() * envelope(t));
    (even, odd)
}

#[inline]
fn clamp_index(i: i64, len: usize) -> usize {
    i.clamp(0, len as i64 - 1) as usize
}

/// 1D convolution `out[i] = sum_k h[k] in[i - k]` with edge replication.
fn convolve_line(input: &[f64], stride: usize, len: usize, kernel: &Kernel1d, out: &mut [f64]) {
    let r = kernel.radius() as i64;
    for i in 0..len {
        let mut acc = 0.0;
        for k in -r..=r {
            acc += kernel.at(k) * input[clamp_index(i as i64 - k, len) * stride];
        }
        out[i * stride] = acc;
    }
}

/// Convolves every frame with the separable kernel, first along x then y.
pub fn convolve_spatial(field: &Grid3, kernel: &Kernel1d) -> Grid3 {
    let (w, h, _) = field.dims();
    let plane = w * h;
    let mut out = Grid3::zeros(field.dims());
    out.data_mut()
        .par_chunks_mut(plane)
        .zip(field.data().par_chunks(plane))
        .for_each(|(dst, src)| {
            let mut rows = vec![0.0; plane];
            for y in 0..h {
                convolve_line(&src[y * w..], 1, w, kernel, &mut rows[y * w..]);
            }
            for x in 0..w {
                convolve_line(&rows[x..], w, h, kernel, &mut dst[x..]);
            }
        });
    out
}

/// Convolves along t at every (x, y).
pub fn convolve_temporal(field: &Grid3, kernel: &Kernel1d) -> Grid3 {
    let (w, h, frames) = field.dims();
    let plane = w * h;
    let mut out = Grid3::zeros(field.dims());
    let r = kernel.radius() as i64;
    let src = field.data();
    out.data_mut()
        .par_chunks_mut(plane)
        .enumerate()
        .for_each(|(t, dst)| {
            for (i, d) in dst.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in -r..=r {
                    acc += kernel.at(k) * src[clamp_index(t as i64 - k, frames) * plane + i];
                }
                *d = acc;
            }
        });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_is_normalized_and_sized() {
        let g = gaussian_kernel(2.5);
        assert_eq!(g.radius(), 8);
        assert!((g.taps().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(g.at(-3), g.at(3));
    }

    #[test]
    fn gabor_pair_symmetry() {
        for tau in [0.7, 1.5, 2.0, 3.3] {
            let (ev, od) = gabor_quadrature_pair(tau);
            assert_eq!(ev.at(0), -1.0);
            assert_eq!(od.at(0), 0.0);
            let r = ev.radius() as i64;
            for t in 1..=r {
                assert!((ev.at(t) - ev.at(-t)).abs() < 1e-15);
                assert!((od.at(t) + od.at(-t)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gabor_support_for_default_tau() {
        let (ev, od) = gabor_quadrature_pair(1.5);
        assert_eq!(ev.taps().len(), 11);
        assert_eq!(od.radius(), 5);
        // omega = 8/3 at t = 1
        let expected = -(2.0 * PI * 8.0 / 3.0).cos() * (-1.0f64 / 2.25).exp();
        assert!((ev.at(1) - expected).abs() < 1e-15);
    }
}
