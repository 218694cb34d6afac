use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::Grid2;

/// Complex grid, row-major like [`Grid2`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    pub width: usize,
    pub height: usize,
    pub data: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn get(&self, u: usize, v: usize) -> Complex64 {
        self.data[v * self.width + u]
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.norm()).collect()
    }
}

fn transform(width: usize, height: usize, mut data: Vec<Complex64>, inverse: bool) -> Vec<Complex64> {
    let mut planner = FftPlanner::<f64>::new();
    let (row_fft, col_fft) = if inverse {
        (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
    } else {
        (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
    };
    row_fft.process(&mut data);
    let mut column = vec![Complex64::default(); height];
    for x in 0..width {
        for (y, c) in column.iter_mut().enumerate() {
            *c = data[y * width + x];
        }
        col_fft.process(&mut column);
        for (y, c) in column.iter().enumerate() {
            data[y * width + x] = *c;
        }
    }
    data
}

/// Unnormalized forward 2D DFT, `F(u,v) = sum f(x,y) e^{-2 pi i (ux/W + vy/H)}`.
pub fn dft2(plane: &Grid2) -> ComplexGrid {
    let data = plane.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    ComplexGrid {
        width: plane.width(),
        height: plane.height(),
        data: transform(plane.width(), plane.height(), data, false),
    }
}

/// Inverse 2D DFT carrying the `1/(WH)` factor.
pub fn idft2(spectrum: &ComplexGrid) -> ComplexGrid {
    let scale = 1.0 / (spectrum.width * spectrum.height) as f64;
    let data = transform(spectrum.width, spectrum.height, spectrum.data.clone(), true)
        .into_iter()
        .map(|c| c * scale)
        .collect();
    ComplexGrid { width: spectrum.width, height: spectrum.height, data }
}
