use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binio::{Reader, Writer};
use crate::codebook::squared_distance;
use crate::error::{Error, Result};

pub(crate) const SVM_MAGIC: &[u8; 8] = b"STPSVM01";
const SVM_VERSION: u32 = 1;
const TAU: f64 = 1e-12;

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

/// Dual variables and bias of a solved binary problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision function is Σ α_i y_i K(x_i, x) + bias.
    pub bias: f64,
    pub iterations: usize,
}

/// Sequential minimal optimization over a precomputed kernel matrix.
///
/// Working pairs are chosen by maximal KKT violation; iteration stops when
/// the violation gap drops below `tol`.
pub fn smo_solve(kernel: &[Vec<f64>], y: &[f64], c: f64, tol: f64) -> Result<SmoSolution> {
    let n = y.len();
    if kernel.len() != n || kernel.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, actual: kernel.len() });
    }
    if !y.iter().any(|&v| v > 0.0) || !y.iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("SVM training needs both classes"));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::invalid("SVM labels must be +1 or -1"));
    }
    if !(c > 0.0) || !(tol > 0.0) {
        return Err(Error::invalid("C and tol must be positive"));
    }
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i][j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = (100 * n).max(10_000_000);
    let mut iterations = 0;

    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi < 0.0 && a < c) || (yi > 0.0 && a > 0.0);

    while iterations < max_iter {
        let mut i = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > g_max {
                g_max = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < g_min {
                g_min = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min < tol {
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(i, t) * di + q(j, t) * dj;
        }
    }
    if iterations >= max_iter {
        log::warn!("SMO stopped at the iteration cap ({max_iter}) before reaching tol {tol}");
    }

    // bias: mean over free vectors, else midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };
    Ok(SmoSolution { alpha, bias: -rho, iterations })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub support_vectors: Vec<Vec<f64>>,
    /// α_i y_i per support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
}

impl BinarySvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, a)| a * rbf_kernel(sv, x, self.gamma))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        if self.decision(x) > 0.0 { 1.0 } else { -1.0 }
    }

    fn from_solution(x: &[&[f64]], y: &[f64], sol: &SmoSolution, c: f64, gamma: f64) -> Self {
        let mut support_vectors = Vec::new();
        let mut coefficients = Vec::new();
        for ((xi, yi), a) in x.iter().zip(y).zip(&sol.alpha) {
            if *a > 0.0 {
                support_vectors.push(xi.to_vec());
                coefficients.push(a * yi);
            }
        }
        Self { support_vectors, coefficients, bias: sol.bias, gamma, c }
    }
}

fn check_rows(x: &[Vec<f64>]) -> Result<()> {
    let dim = x.first().map_or(0, Vec::len);
    match x.iter().find(|r| r.len() != dim) {
        Some(bad) => Err(Error::DimensionMismatch { expected: dim, actual: bad.len() }),
        None => Ok(()),
    }
}

/// Binary RBF-SVM; labels are ±1.
pub fn svm_train_binary(x: &[Vec<f64>], y: &[f64], c: f64, gamma: f64, tol: f64) -> Result<BinarySvm> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), actual: y.len() });
    }
    check_rows(x)?;
    let kernel: Vec<Vec<f64>> = x
        .par_iter()
        .map(|a| x.iter().map(|b| rbf_kernel(a, b, gamma)).collect())
        .collect();
    let sol = smo_solve(&kernel, y, c, tol)?;
    let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
    Ok(BinarySvm::from_solution(&rows, y, &sol, c, gamma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSearchSpec {
    pub c_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub folds: usize,
    pub tol: f64,
}

impl Default for GridSearchSpec {
    fn default() -> Self {
        Self {
            c_grid: (-5..=15).step_by(2).map(|e| 2f64.powi(e)).collect(),
            gamma_grid: (-15..=3).step_by(2).map(|e| 2f64.powi(e)).collect(),
            folds: 5,
            tol: 1e-3,
        }
    }
}

impl GridSearchSpec {
    pub fn fixed(c: f64, gamma: f64) -> Self {
        Self { c_grid: vec![c], gamma_grid: vec![gamma], ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_grid.is_empty() || self.gamma_grid.is_empty() {
            return Err(Error::invalid("grid search needs non-empty C and gamma grids"));
        }
        if self.folds < 2 {
            return Err(Error::invalid("grid search needs at least 2 folds"));
        }
        if self.c_grid.iter().chain(&self.gamma_grid).any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("grid values must be positive and finite"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        Ok(())
    }

    fn sorted(&self) -> (Vec<f64>, Vec<f64>) {
        let sort = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        (sort(&self.c_grid), sort(&self.gamma_grid))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairModel {
    /// Class index voted for by a positive decision value.
    pub positive: usize,
    pub negative: usize,
    pub svm: BinarySvm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub classes: Vec<String>,
    pub c: f64,
    pub gamma: f64,
    pub pairs: Vec<PairModel>,
    /// Pooled cross-validation accuracy of the chosen cell, if a search ran.
    pub cv_accuracy: Option<f64>,
}

/// Squared Euclidean distances between all training rows.
struct DistCache {
    d: Vec<Vec<f64>>,
}

impl DistCache {
    fn new(x: &[Vec<f64>]) -> Self {
        let d = x.par_iter().map(|a| x.iter().map(|b| squared_distance(a, b)).collect()).collect();
        Self { d }
    }
}

/// One-vs-one models over the rows in `idx`.
fn train_ovo(
    x: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    idx: &[usize],
    cache: &DistCache,
    c: f64,
    gamma: f64,
    tol: f64,
) -> Result<Vec<PairModel>> {
    let mut pairs = Vec::new();
    for a in 0..n_classes {
        for b in a + 1..n_classes {
            let sub: Vec<usize> = idx.iter().copied().filter(|&i| labels[i] == a || labels[i] == b).collect();
            let y: Vec<f64> = sub.iter().map(|&i| if labels[i] == a { 1.0 } else { -1.0 }).collect();
            let kernel: Vec<Vec<f64>> = sub
                .iter()
                .map(|&i| sub.iter().map(|&j| (-gamma * cache.d[i][j]).exp()).collect())
                .collect();
            let sol = smo_solve(&kernel, &y, c, tol)?;
            let rows: Vec<&[f64]> = sub.iter().map(|&i| x[i].as_slice()).collect();
            pairs.push(PairModel { positive: a, negative: b, svm: BinarySvm::from_solution(&rows, &y, &sol, c, gamma) });
        }
    }
    Ok(pairs)
}

/// Majority vote over pairs; ties go to the greatest summed margin, then
/// the lowest class index.
fn vote(pairs: &[PairModel], n_classes: usize, x: &[f64]) -> usize {
    let mut votes = vec![0usize; n_classes];
    let mut margin = vec![0.0f64; n_classes];
    for p in pairs {
        let d = p.svm.decision(x);
        if d > 0.0 {
            votes[p.positive] += 1;
        } else {
            votes[p.negative] += 1;
        }
        margin[p.positive] += d;
        margin[p.negative] -= d;
    }
    let mut best = 0;
    for k in 1..n_classes {
        if votes[k] > votes[best] || (votes[k] == votes[best] && margin[k] > margin[best]) {
            best = k;
        }
    }
    best
}

/// Seeded stratified fold assignment.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut fold = vec![0; labels.len()];
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for (pos, i) in members.into_iter().enumerate() {
            fold[i] = pos % folds;
        }
    }
    fold
}

impl SvmModel {
    /// Grid search by stratified cross-validation, then a final fit on all data.
    pub fn train(x: &[Vec<f64>], labels: &[String], spec: &GridSearchSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        if x.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), actual: labels.len() });
        }
        check_rows(x)?;
        let mut classes: Vec<String> = labels.to_vec();
        classes.sort();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::invalid("SVM training needs at least 2 classes"));
        }
        let y: Vec<usize> = labels.iter().map(|l| classes.binary_search(l).expect("label in classes")).collect();
        for (k, name) in classes.iter().enumerate() {
            let count = y.iter().filter(|&&v| v == k).count();
            if count < spec.folds {
                return Err(Error::invalid(format!(
                    "class {name} has {count} samples, fewer than {} folds",
                    spec.folds
                )));
            }
        }
        let cache = DistCache::new(x);
        let all: Vec<usize> = (0..x.len()).collect();
        let (cs, gammas) = spec.sorted();

        let (c, gamma, cv_accuracy) = if cs.len() * gammas.len() == 1 {
            (cs[0], gammas[0], None)
        } else {
            let fold = stratified_folds(&y, spec.folds, seed);
            let cells: Vec<(f64, f64)> = cs.iter().flat_map(|&c| gammas.iter().map(move |&g| (c, g))).collect();
            let scores = cells
                .par_iter()
                .map(|&(c, g)| {
                    let mut correct = 0usize;
                    for f in 0..spec.folds {
                        let train: Vec<usize> = all.iter().copied().filter(|&i| fold[i] != f).collect();
                        let pairs = train_ovo(x, &y, classes.len(), &train, &cache, c, g, spec.tol)?;
                        correct += all
                            .iter()
                            .filter(|&&i| fold[i] == f && vote(&pairs, classes.len(), &x[i]) == y[i])
                            .count();
                    }
                    Ok(correct)
                })
                .collect::<Result<Vec<usize>>>()?;
            // cells are in ascending (C, gamma) order; strict > keeps the smallest on ties
            let mut best = 0;
            for k in 1..cells.len() {
                if scores[k] > scores[best] {
                    best = k;
                }
            }
            log::debug!("grid search picked C={} gamma={} ({} / {} correct)", cells[best].0, cells[best].1, scores[best], x.len());
            (cells[best].0, cells[best].1, Some(scores[best] as f64 / x.len() as f64))
        };
        let pairs = train_ovo(x, &y, classes.len(), &all, &cache, c, gamma, spec.tol)?;
        Ok(Self { classes, c, gamma, pairs, cv_accuracy })
    }

    pub fn dim(&self) -> Option<usize> {
        self.pairs.iter().flat_map(|p| p.svm.support_vectors.first()).map(Vec::len).next()
    }

    pub fn predict_index(&self, x: &[f64]) -> usize {
        vote(&self.pairs, self.classes.len(), x)
    }

    pub fn predict(&self, x: &[f64]) -> Result<String> {
        if let Some(d) = self.dim() {
            if d != x.len() {
                return Err(Error::DimensionMismatch { expected: d, actual: x.len() });
            }
        }
        Ok(self.classes[self.predict_index(x)].clone())
    }

    pub(crate) fn write(&self, w: &mut Writer<Vec<u8>>) -> Result<()> {
        w.bytes(SVM_MAGIC)?;
        w.u32(SVM_VERSION)?;
        w.f64(self.c)?;
        w.f64(self.gamma)?;
        w.u64(self.classes.len() as u64)?;
        for l in &self.classes {
            w.str(l)?;
        }
        w.u64(self.pairs.len() as u64)?;
        for p in &self.pairs {
            w.u64(p.positive as u64)?;
            w.u64(p.negative as u64)?;
            w.f64(p.svm.bias)?;
            let dim = p.svm.support_vectors.first().map_or(0, Vec::len);
            w.u64(dim as u64)?;
            w.u64(p.svm.support_vectors.len() as u64)?;
            w.f64s(&p.svm.coefficients)?;
            for sv in &p.svm.support_vectors {
                w.f64s(sv)?;
            }
        }
        Ok(())
    }

    pub(crate) fn read(r: &mut Reader<&[u8]>) -> Result<Self> {
        r.magic(SVM_MAGIC)?;
        let version = r.u32()?;
        if version != SVM_VERSION {
            return Err(Error::Format(format!("unsupported SVM model version {version}")));
        }
        let c = r.f64()?;
        let gamma = r.f64()?;
        let n_classes = r.usize()?;
        let classes = (0..n_classes).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
        let n_pairs = r.usize()?;
        let mut pairs = Vec::with_capacity(n_pairs.min(1 << 16));
        for _ in 0..n_pairs {
            let positive = r.usize()?;
            let negative = r.usize()?;
            if positive >= n_classes || negative >= n_classes {
                return Err(Error::Format("SVM pair refers to an unknown class".into()));
            }
            let bias = r.f64()?;
            let dim = r.usize()?;
            let n_sv = r.usize()?;
            let coefficients = r.f64s(n_sv)?;
            let support_vectors = (0..n_sv).map(|_| r.f64s(dim)).collect::<Result<Vec<_>>>()?;
            pairs.push(PairModel { positive, negative, svm: BinarySvm { support_vectors, coefficients, bias, gamma, c } });
        }
        Ok(Self { classes, c, gamma, pairs, cv_accuracy: None })
    }
}
