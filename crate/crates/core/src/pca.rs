//! Principal component analysis for shrinking long descriptors.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::binio::{read_matrix_block, write_matrix_block};
use crate::error::{Error, Result};

const PCA_MAGIC: &[u8; 8] = b"STPPCA01";

/// Eigenvalues at or below this fraction of the largest count as zero.
const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Orthonormal principal axes, largest variance first.
    pub components: Vec<Vec<f64>>,
    /// Variance along each component. Not persisted; empty after [`PcaModel::load`].
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        pca_project(self, v)
    }

    /// Maps projected coordinates back into the input space.
    pub fn reconstruct(&self, scores: &[f64]) -> Result<Vec<f64>> {
        if scores.len() != self.n_components() {
            return Err(Error::DimensionMismatch { expected: self.n_components(), actual: scores.len() });
        }
        let mut out = self.mean.clone();
        for (s, c) in scores.iter().zip(&self.components) {
            for (o, ci) in out.iter_mut().zip(c) {
                *o += s * ci;
            }
        }
        Ok(out)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut rows: Vec<&[f64]> = vec![&self.mean];
        rows.extend(self.components.iter().map(Vec::as_slice));
        write_matrix_block(PCA_MAGIC, self.input_dim(), self.n_components(), &rows)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (_, _, mut rows) = read_matrix_block(bytes, PCA_MAGIC, 1)?;
        let mean = rows.remove(0);
        Ok(Self { mean, components: rows, explained_variance: Vec::new() })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}

fn centered_matrix(samples: &[Vec<f64>]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = samples.len();
    let dim = samples[0].len();
    if dim == 0 {
        return Err(Error::invalid("samples have zero dimension"));
    }
    let mut mean = vec![0.0; dim];
    for s in samples {
        if s.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: s.len() });
        }
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let x = DMatrix::from_fn(n, dim, |i, j| samples[i][j] - mean[j]);
    Ok((mean, x))
}

/// Eigenpairs sorted by descending eigenvalue.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Flips `v` so its largest-magnitude entry is positive.
fn fix_sign(v: &mut [f64]) {
    let mut pivot = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[pivot].abs() {
            pivot = i;
        }
    }
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Fits the top `n_components` axes of the sample covariance.
///
/// Uses the `dim x dim` covariance when `dim <= n`, otherwise the `n x n`
/// Gram matrix of the centered samples.
pub fn pca_fit(samples: &[Vec<f64>], n_components: usize) -> Result<PcaModel> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid(format!("pca needs at least 2 samples, got {n}")));
    }
    let dim = samples[0].len();
    if n_components == 0 || n_components > dim.min(n - 1) {
        return Err(Error::invalid(format!(
            "n_components must be in 1..={} for {n} samples of dim {dim}, got {n_components}",
            dim.min(n - 1)
        )));
    }
    let (mean, x) = centered_matrix(samples)?;
    let denom = (n - 1) as f64;
    let (variances, axes): (Vec<f64>, Vec<Vec<f64>>) = if dim <= n {
        let cov = (x.transpose() * &x) / denom;
        let (vals, vecs) = sorted_eigen(cov);
        let axes = (0..n_components).map(|c| vecs.column(c).iter().copied().collect()).collect();
        (vals[..n_components].to_vec(), axes)
    } else {
        let gram = (&x * x.transpose()) / denom;
        let (vals, vecs) = sorted_eigen(gram);
        let axes = (0..n_components)
            .map(|c| {
                let lifted = x.transpose() * vecs.column(c);
                let norm = lifted.norm();
                lifted.iter().map(|v| v / norm).collect()
            })
            .collect();
        (vals[..n_components].to_vec(), axes)
    };
    let top = variances[0];
    if !(top > 0.0) {
        return Err(Error::Degenerate("samples have zero variance".into()));
    }
    if let Some(k) = variances.iter().position(|&v| v <= RANK_TOLERANCE * top) {
        return Err(Error::Degenerate(format!(
            "sample covariance has rank {k}, below the requested {n_components} components"
        )));
    }
    let components = axes
        .into_iter()
        .map(|mut a: Vec<f64>| {
            fix_sign(&mut a);
            a
        })
        .collect();
    Ok(PcaModel { mean, components, explained_variance: variances })
}

/// `components^T (v - mean)`.
pub fn pca_project(model: &PcaModel, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != model.input_dim() {
        return Err(Error::DimensionMismatch { expected: model.input_dim(), actual: v.len() });
    }
    Ok(model
        .components
        .iter()
        .map(|c| c.iter().zip(v).zip(&model.mean).map(|((ci, vi), mi)| ci * (vi - mi)).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn random_samples(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect()).collect()
    }

    #[test]
    fn projecting_the_mean_gives_zero() {
        let samples = random_samples(30, 6, 3);
        let m = pca_fit(&samples, 4).unwrap();
        assert!(m.project(&m.mean).unwrap().iter().all(|v| v.abs() < 1e-15));
        assert!(m.project(&[0.0; 5]).is_err());
    }

    #[test]
    fn argument_checks() {
        let samples = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![0.0, 0.5]];
        assert!(pca_fit(&samples[..1], 1).is_err());
        assert!(pca_fit(&samples, 0).is_err());
        assert!(pca_fit(&samples, 3).is_err());
        assert!(pca_fit(&[vec![1.0, 2.0], vec![1.0]], 1).is_err());
    }

    #[test]
    fn rank_deficiency_is_an_error() {
        // collinear samples: rank 1
        let samples: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64, 0.0]).collect();
        assert!(pca_fit(&samples, 1).is_ok());
        assert!(matches!(pca_fit(&samples, 2), Err(Error::Degenerate(_))));
    }

    #[test]
    fn gram_route_matches_covariance_route() {
        let samples = random_samples(12, 8, 9);
        let cov = pca_fit(&samples, 3).unwrap();
        // duplicate features push dim above the sample count, forcing the Gram route
        let wide: Vec<Vec<f64>> = samples.iter().map(|v| [v.as_slice(), v.as_slice()].concat()).collect();
        let gram = pca_fit(&wide, 3).unwrap();
        for (a, b) in cov.explained_variance.iter().zip(&gram.explained_variance) {
            assert!((2.0 * a - b).abs() < 1e-10);
        }
        for v in &samples {
            let wv = [v.as_slice(), v.as_slice()].concat();
            let p1 = cov.project(v).unwrap();
            let p2 = gram.project(&wv).unwrap();
            for (a, b) in p1.iter().zip(&p2) {
                assert!((a * 2f64.sqrt() - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let samples = random_samples(20, 5, 1);
        let m = pca_fit(&samples, 2).unwrap();
        let back = PcaModel::from_bytes(&m.to_bytes().unwrap()).unwrap();
        assert_eq!(back.mean, m.mean);
        assert_eq!(back.components, m.components);
        assert!(PcaModel::from_bytes(b"STDF").is_err());
    }
}
