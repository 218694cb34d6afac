use std::f64::consts::PI;

use crate::grid::Grid2;

/// Orthonormal DCT-II basis: row `u` holds `alpha(u) cos(pi (2x+1) u / 2N)`.
fn dct_basis(n: usize) -> Vec<f64> {
    let mut m = Vec::with_capacity(n * n);
    for u in 0..n {
        let alpha = if u == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        for x in 0..n {
            m.push(alpha * (PI * (2 * x + 1) as f64 * u as f64 / (2 * n) as f64).cos());
        }
    }
    m
}

/// Orthonormal 2D DCT-II, rows then columns; each axis uses its own length.
pub fn dct2(plane: &Grid2) -> Grid2 {
    let (w, h) = (plane.width(), plane.height());
    let bx = dct_basis(w);
    let by = dct_basis(h);
    let mut rows = Grid2::zeros(w, h);
    for y in 0..h {
        let src = plane.row(y);
        for u in 0..w {
            let basis = &bx[u * w..(u + 1) * w];
            rows.set(u, y, basis.iter().zip(src).map(|(b, s)| b * s).sum());
        }
    }
    let mut out = Grid2::zeros(w, h);
    for u in 0..w {
        for v in 0..h {
            let basis = &by[v * h..(v + 1) * h];
            let acc: f64 = basis.iter().enumerate().map(|(y, b)| b * rows.get(u, y)).sum();
            out.set(u, v, acc);
        }
    }
    out
}

/// Inverse of [`dct2`] (the transpose, since the basis is orthonormal).
pub fn idct2(coeffs: &Grid2) -> Grid2 {
    let (w, h) = (coeffs.width(), coeffs.height());
    let bx = dct_basis(w);
    let by = dct_basis(h);
    let mut cols = Grid2::zeros(w, h);
    for u in 0..w {
        for y in 0..h {
            let acc: f64 = (0..h).map(|v| by[v * h + y] * coeffs.get(u, v)).sum();
            cols.set(u, y, acc);
        }
    }
    Grid2::from_fn(w, h, |x, y| (0..w).map(|u| bx[u * w + x] * cols.get(u, y)).sum())
}
