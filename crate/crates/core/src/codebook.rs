//! K-means video-word codebooks and bag-of-words encoding.

use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binio::{read_matrix_block, write_matrix_block};
use crate::error::{Error, Result};

const CODEBOOK_MAGIC: &[u8; 8] = b"STPCBK01";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KmeansInit {
    /// k distinct samples drawn uniformly without replacement.
    Uniform,
    /// D^2-weighted seeding (k-means++); still picks k distinct samples.
    PlusPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
    pub init: KmeansInit,
}

impl KmeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self { k, seed, max_iters: 300, tol: 1e-6, init: KmeansInit::PlusPlus }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub centroids: Vec<Vec<f64>>,
    pub seed: u64,
}

impl Codebook {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let rows: Vec<&[f64]> = self.centroids.iter().map(Vec::as_slice).collect();
        write_matrix_block(CODEBOOK_MAGIC, self.dim(), self.k(), &rows)
    }

    /// The seed is not stored on disk and reads back as 0.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (_, k, centroids) = read_matrix_block(bytes, CODEBOOK_MAGIC, 0)?;
        if k == 0 {
            return Err(Error::Format("codebook has no centroids".into()));
        }
        Ok(Self { centroids, seed: 0 })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Codebook plus the per-iteration objective trace of the fit.
#[derive(Debug, Clone)]
pub struct KmeansReport {
    pub codebook: Codebook,
    /// Sum of squared distances after each assignment step.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub assignments: Vec<usize>,
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid and its squared distance; ties go to the lowest index.
fn nearest(centroids: &[Vec<f64>], v: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(c, v);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn initial_centroids(data: &[Vec<f64>], params: &KmeansParams, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    match params.init {
        KmeansInit::Uniform => sample(rng, n, params.k).into_iter().map(|i| data[i].clone()).collect(),
        KmeansInit::PlusPlus => {
            let mut chosen = vec![rng.gen_range(0..n)];
            let mut d2: Vec<f64> = data.iter().map(|v| squared_distance(v, &data[chosen[0]])).collect();
            while chosen.len() < params.k {
                let total: f64 = d2.iter().sum();
                let next = if total > 0.0 {
                    let mut target = rng.gen::<f64>() * total;
                    let mut pick = None;
                    for (i, &w) in d2.iter().enumerate() {
                        if w > 0.0 {
                            pick = Some(i);
                            if target < w {
                                break;
                            }
                            target -= w;
                        }
                    }
                    pick.expect("positive total implies a positive weight")
                } else {
                    // every remaining sample duplicates a chosen one
                    let rest: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
                    rest[rng.gen_range(0..rest.len())]
                };
                chosen.push(next);
                for (w, v) in d2.iter_mut().zip(data) {
                    *w = w.min(squared_distance(v, &data[next]));
                }
            }
            chosen.into_iter().map(|i| data[i].clone()).collect()
        }
    }
}

fn validate(data: &[Vec<f64>], k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if data.len() < k {
        return Err(Error::invalid(format!("k-means needs at least k={k} points, got {}", data.len())));
    }
    let dim = data[0].len();
    if let Some(bad) = data.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, actual: bad.len() });
    }
    Ok(dim)
}

/// Lloyd's algorithm with deterministic seeding, lowest-index tie breaks and
/// farthest-point reseeding of empty clusters.
pub fn kmeans_fit_report(data: &[Vec<f64>], params: &KmeansParams) -> Result<KmeansReport> {
    let dim = validate(data, params.k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut centroids = initial_centroids(data, params, &mut rng);
    let mut history = Vec::new();
    let mut assignments: Vec<usize> = Vec::new();
    let mut iterations = 0;

    loop {
        let assigned: Vec<(usize, f64)> = data.par_iter().map(|v| nearest(&centroids, v)).collect();
        history.push(assigned.iter().map(|a| a.1).sum());
        let labels: Vec<usize> = assigned.iter().map(|a| a.0).collect();
        let unchanged = labels == assignments;
        assignments = labels;
        if unchanged || iterations >= params.max_iters {
            break;
        }
        iterations += 1;

        let mut sums = vec![vec![0.0; dim]; params.k];
        let mut counts = vec![0usize; params.k];
        for (v, &c) in data.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(v) {
                *s += x;
            }
        }
        let mut residual: Vec<f64> = assigned.iter().map(|a| a.1).collect();
        let mut shift = 0.0f64;
        for c in 0..params.k {
            let next = if counts[c] == 0 {
                let far = (0..data.len())
                    .fold(0, |best, i| if residual[i] > residual[best] { i } else { best });
                residual[far] = 0.0;
                data[far].clone()
            } else {
                sums[c].iter().map(|s| s / counts[c] as f64).collect()
            };
            shift = shift.max(squared_distance(&next, &centroids[c]).sqrt());
            centroids[c] = next;
        }
        if shift < params.tol {
            let assigned: Vec<(usize, f64)> = data.par_iter().map(|v| nearest(&centroids, v)).collect();
            history.push(assigned.iter().map(|a| a.1).sum());
            assignments = assigned.into_iter().map(|a| a.0).collect();
            break;
        }
    }
    Ok(KmeansReport {
        codebook: Codebook { centroids, seed: params.seed },
        objective_history: history,
        iterations,
        assignments,
    })
}

pub fn kmeans_fit(data: &[Vec<f64>], params: &KmeansParams) -> Result<Codebook> {
    kmeans_fit_report(data, params).map(|r| r.codebook)
}

/// Index of the nearest video word; ties go to the lowest index.
pub fn assign_word(codebook: &Codebook, d: &[f64]) -> Result<usize> {
    if d.len() != codebook.dim() {
        return Err(Error::DimensionMismatch { expected: codebook.dim(), actual: d.len() });
    }
    Ok(nearest(&codebook.centroids, d).0)
}

/// Word-occurrence counts of one sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BowHistogram {
    pub sequence_id: String,
    pub counts: Vec<u32>,
}

impl BowHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

pub fn bow_encode(codebook: &Codebook, descriptors: &[Vec<f64>]) -> Result<BowHistogram> {
    if descriptors.is_empty() {
        return Err(Error::invalid("cannot encode a sequence without descriptors"));
    }
    let mut counts = vec![0u32; codebook.k()];
    for d in descriptors {
        counts[assign_word(codebook, d)?] += 1;
    }
    Ok(BowHistogram { sequence_id: String::new(), counts })
}
