//! Separable multilevel Daubechies wavelet decomposition (Mallat scheme).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid2;

/// Daubechies family member, named by tap count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Daubechies {
    D2,
    D4,
    D6,
    D8,
}

const D6_REC_LO: [f64; 6] = [
    0.332_670_552_950_082_62,
    0.806_891_509_311_092_58,
    0.459_877_502_118_491_57,
    -0.135_011_020_010_254_59,
    -0.085_441_273_882_026_662,
    0.035_226_291_885_709_537,
];

const D8_REC_LO: [f64; 8] = [
    0.230_377_813_308_896_50,
    0.714_846_570_552_915_65,
    0.630_880_767_929_858_91,
    -0.027_983_769_416_859_854,
    -0.187_034_811_719_093_08,
    0.030_841_381_835_560_764,
    0.032_883_011_666_885_200,
    -0.010_597_401_785_069_032,
];

impl Daubechies {
    pub fn taps(self) -> usize {
        match self {
            Self::D2 => 2,
            Self::D4 => 4,
            Self::D6 => 6,
            Self::D8 => 8,
        }
    }

    /// Synthesis low-pass filter.
    fn rec_lo(self) -> Vec<f64> {
        match self {
            Self::D2 => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
            Self::D4 => {
                let s3 = 3f64.sqrt();
                let d = 4.0 * 2f64.sqrt();
                vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d]
            }
            Self::D6 => D6_REC_LO.to_vec(),
            Self::D8 => D8_REC_LO.to_vec(),
        }
    }

    /// Analysis (low, high) filter pair.
    pub fn analysis_filters(self) -> (Vec<f64>, Vec<f64>) {
        let lo: Vec<f64> = self.rec_lo().into_iter().rev().collect();
        let n = lo.len();
        let hi = (0..n)
            .map(|k| if k % 2 == 0 { -lo[n - 1 - k] } else { lo[n - 1 - k] })
            .collect();
        (lo, hi)
    }
}

/// Boundary handling for the analysis filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    /// Half-sample symmetric; output length `floor((N + L - 1) / 2)`.
    Symmetric,
    /// Circular; requires even lengths, output `N / 2`, perfectly invertible.
    Periodic,
}

/// Detail subbands of one level. The first letter is the filter along x,
/// the second along y.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailBands {
    pub lh: Grid2,
    pub hl: Grid2,
    pub hh: Grid2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subbands {
    /// Coarsest approximation.
    pub ll: Grid2,
    /// Detail bands, coarsest level first.
    pub details: Vec<DetailBands>,
}

impl Subbands {
    /// LL_k, then (LH, HL, HH) from level k down to level 1.
    pub fn ordered(&self) -> impl Iterator<Item = &Grid2> {
        std::iter::once(&self.ll).chain(self.details.iter().flat_map(|d| [&d.lh, &d.hl, &d.hh]))
    }

    /// All coefficients in subband order, row-major within each band.
    pub fn flatten(&self) -> Vec<f64> {
        self.ordered().flat_map(|g| g.data().iter().copied()).collect()
    }

    pub fn coefficient_count(&self) -> usize {
        self.ordered().map(Grid2::len).sum()
    }
}

/// Half-sample symmetric reflection of `j` into `0..n`.
pub fn reflect(j: i64, n: usize) -> usize {
    let n = n as i64;
    let period = 2 * n;
    let m = j.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

pub fn output_len(n: usize, taps: usize, ext: Extension) -> usize {
    match ext {
        Extension::Symmetric => (n + taps - 1) / 2,
        Extension::Periodic => n / 2,
    }
}

/// `out[i] = sum_k filter[k] x[2i + 1 - k]` with the given extension.
fn analyze_line(x: &[f64], filter: &[f64], ext: Extension) -> Vec<f64> {
    let n = x.len();
    (0..output_len(n, filter.len(), ext))
        .map(|i| {
            filter
                .iter()
                .enumerate()
                .map(|(k, h)| {
                    let j = 2 * i as i64 + 1 - k as i64;
                    let idx = match ext {
                        Extension::Symmetric => reflect(j, n),
                        Extension::Periodic => j.rem_euclid(n as i64) as usize,
                    };
                    h * x[idx]
                })
                .sum()
        })
        .collect()
}

/// Transpose of the periodic analysis step.
fn synthesize_line(lo: &[f64], hi: &[f64], lo_f: &[f64], hi_f: &[f64]) -> Vec<f64> {
    let n = 2 * lo.len();
    let mut x = vec![0.0; n];
    for i in 0..lo.len() {
        for k in 0..lo_f.len() {
            let j = (2 * i as i64 + 1 - k as i64).rem_euclid(n as i64) as usize;
            x[j] += lo_f[k] * lo[i] + hi_f[k] * hi[i];
        }
    }
    x
}

fn map_rows(g: &Grid2, f: impl Fn(&[f64]) -> Vec<f64>) -> Grid2 {
    let rows: Vec<Vec<f64>> = (0..g.height()).map(|y| f(g.row(y))).collect();
    let w = rows[0].len();
    Grid2::new(w, g.height(), rows.concat()).expect("rows share length")
}

fn map_cols(g: &Grid2, f: impl Fn(&[f64]) -> Vec<f64>) -> Grid2 {
    let cols: Vec<Vec<f64>> = (0..g.width())
        .map(|x| f(&(0..g.height()).map(|y| g.get(x, y)).collect::<Vec<_>>()))
        .collect();
    let h = cols[0].len();
    Grid2::from_fn(g.width(), h, |x, y| cols[x][y])
}

fn analyze_level(g: &Grid2, lo: &[f64], hi: &[f64], ext: Extension) -> (Grid2, DetailBands) {
    let l = map_rows(g, |r| analyze_line(r, lo, ext));
    let h = map_rows(g, |r| analyze_line(r, hi, ext));
    let ll = map_cols(&l, |c| analyze_line(c, lo, ext));
    let lh = map_cols(&l, |c| analyze_line(c, hi, ext));
    let hl = map_cols(&h, |c| analyze_line(c, lo, ext));
    let hh = map_cols(&h, |c| analyze_line(c, hi, ext));
    (ll, DetailBands { lh, hl, hh })
}

/// Multilevel 2D decomposition. `levels` may not exceed `log2(min(width, height))`.
pub fn dwt2(plane: &Grid2, levels: usize, family: Daubechies, ext: Extension) -> Result<Subbands> {
    if levels == 0 {
        return Err(Error::invalid("dwt needs at least one level"));
    }
    let min_dim = plane.width().min(plane.height());
    if levels >= usize::BITS as usize || (1usize << levels) > min_dim {
        return Err(Error::invalid(format!(
            "{levels} dwt levels exceed log2 of the smallest plane side {min_dim}"
        )));
    }
    let (lo, hi) = family.analysis_filters();
    let mut ll = plane.clone();
    let mut details = Vec::with_capacity(levels);
    for level in 0..levels {
        if ext == Extension::Periodic && (ll.width() % 2 != 0 || ll.height() % 2 != 0) {
            return Err(Error::invalid(format!(
                "periodic dwt needs even sides at level {}, got {}x{}",
                level + 1,
                ll.width(),
                ll.height()
            )));
        }
        let (next, bands) = analyze_level(&ll, &lo, &hi, ext);
        details.push(bands);
        ll = next;
    }
    details.reverse();
    Ok(Subbands { ll, details })
}

/// Inverse of a periodic-extension [`dwt2`].
pub fn idwt2_periodic(bands: &Subbands, family: Daubechies) -> Grid2 {
    let (lo, hi) = family.analysis_filters();
    let mut ll = bands.ll.clone();
    for d in &bands.details {
        // undo the column step for the low and high row halves, then the row step
        let l = column_synthesis(&ll, &d.lh, &lo, &hi);
        let h = column_synthesis(&d.hl, &d.hh, &lo, &hi);
        let w = 2 * l.width();
        ll = Grid2::from_fn(w, l.height(), |_, _| 0.0);
        for y in 0..l.height() {
            let row = synthesize_line(l.row(y), h.row(y), &lo, &hi);
            for (x, v) in row.into_iter().enumerate() {
                ll.set(x, y, v);
            }
        }
    }
    ll
}

fn column_synthesis(low: &Grid2, high: &Grid2, lo: &[f64], hi: &[f64]) -> Grid2 {
    let cols: Vec<Vec<f64>> = (0..low.width())
        .map(|x| {
            let a: Vec<f64> = (0..low.height()).map(|y| low.get(x, y)).collect();
            let d: Vec<f64> = (0..high.height()).map(|y| high.get(x, y)).collect();
            synthesize_line(&a, &d, lo, hi)
        })
        .collect();
    Grid2::from_fn(low.width(), 2 * low.height(), |x, y| cols[x][y])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters_are_orthonormal() {
        for fam in [Daubechies::D2, Daubechies::D4, Daubechies::D6, Daubechies::D8] {
            let (lo, hi) = fam.analysis_filters();
            assert!((lo.iter().sum::<f64>() - 2f64.sqrt()).abs() < 1e-12, "{fam:?}");
            assert!(hi.iter().sum::<f64>().abs() < 1e-12, "{fam:?}");
            for shift in (0..lo.len()).step_by(2) {
                let dot: f64 = (0..lo.len() - shift).map(|k| lo[k] * lo[k + shift]).sum();
                let expect = if shift == 0 { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12, "{fam:?} shift {shift}");
                let cross: f64 = (0..lo.len() - shift).map(|k| lo[k] * hi[k + shift]).sum();
                assert!(cross.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn d4_matches_reference_taps() {
        let (lo, _) = Daubechies::D4.analysis_filters();
        let reference = [-0.129_409_522_551_260_37, 0.224_143_868_042_013_4, 0.836_516_303_737_807_9, 0.482_962_913_144_534_16];
        for (a, b) in lo.iter().zip(reference) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn reflect_is_half_sample() {
        let idx: Vec<usize> = (-3..8).map(|j| reflect(j, 4)).collect();
        assert_eq!(idx, vec![2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0]);
    }

    #[test]
    fn subband_sizes_for_cuboid_planes() {
        let g = Grid2::zeros(17, 11);
        let b = dwt2(&g, 2, Daubechies::D4, Extension::Symmetric).unwrap();
        assert_eq!((b.ll.width(), b.ll.height()), (6, 5));
        assert_eq!((b.details[1].hh.width(), b.details[1].hh.height()), (10, 7));
        assert_eq!(b.coefficient_count(), 4 * 30 + 3 * 70);
    }

    #[test]
    fn too_many_levels() {
        let g = Grid2::zeros(17, 11);
        assert!(dwt2(&g, 3, Daubechies::D4, Extension::Symmetric).is_ok());
        assert!(dwt2(&g, 4, Daubechies::D4, Extension::Symmetric).is_err());
        assert!(dwt2(&g, 0, Daubechies::D4, Extension::Symmetric).is_err());
        assert!(dwt2(&g, 1, Daubechies::D4, Extension::Periodic).is_err());
    }

    #[test]
    fn constant_plane_has_no_detail() {
        let g = Grid2::from_fn(17, 17, |_, _| 0.6);
        let b = dwt2(&g, 2, Daubechies::D4, Extension::Symmetric).unwrap();
        for d in &b.details {
            for band in [&d.lh, &d.hl, &d.hh] {
                assert!(band.data().iter().all(|v| v.abs() < 1e-12));
            }
        }
        // each level scales a constant by sqrt(2)^2
        assert!(b.ll.data().iter().all(|v| (v - 0.6 * 4.0).abs() < 1e-12));
    }
}
