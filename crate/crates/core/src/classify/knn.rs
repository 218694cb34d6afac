use std::collections::BTreeMap;

use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};

pub(crate) const KNN_MAGIC: &[u8; 8] = b"STPKNN01";
const KNN_VERSION: u32 = 1;

/// ½ Σ (p−q)²/(p+q) over bins where p+q ≠ 0.
pub fn chi2_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), actual: q.len() });
    }
    let mut sum = 0.0;
    for (a, b) in p.iter().zip(q) {
        let s = a + b;
        if s != 0.0 {
            sum += (a - b) * (a - b) / s;
        }
    }
    Ok(0.5 * sum)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub histograms: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    pub k_neighbors: usize,
}

impl KnnModel {
    pub fn new(histograms: Vec<Vec<f64>>, labels: Vec<String>, k_neighbors: usize) -> Result<Self> {
        if histograms.is_empty() {
            return Err(Error::invalid("KNN needs at least one training histogram"));
        }
        if histograms.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: histograms.len(), actual: labels.len() });
        }
        if k_neighbors == 0 || k_neighbors > histograms.len() {
            return Err(Error::invalid(format!(
                "k_neighbors must lie in 1..={}, got {k_neighbors}",
                histograms.len()
            )));
        }
        let dim = histograms[0].len();
        if let Some(bad) = histograms.iter().find(|h| h.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, actual: bad.len() });
        }
        Ok(Self { histograms, labels, k_neighbors })
    }

    pub fn dim(&self) -> usize {
        self.histograms[0].len()
    }

    /// Indices and χ² distances of the nearest neighbours, nearest first;
    /// equal distances keep training order.
    pub fn neighbours(&self, h: &[f64]) -> Result<Vec<(usize, f64)>> {
        let mut dists = self
            .histograms
            .iter()
            .enumerate()
            .map(|(i, t)| chi2_distance(t, h).map(|d| (i, d)))
            .collect::<Result<Vec<_>>>()?;
        dists.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        dists.truncate(self.k_neighbors);
        Ok(dists)
    }

    pub fn predict(&self, h: &[f64]) -> Result<String> {
        // label -> (votes, summed distance)
        let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
        for (i, d) in self.neighbours(h)? {
            let e = tally.entry(self.labels[i].as_str()).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += d;
        }
        // BTreeMap iterates labels in lexicographic order, so strict
        // comparisons keep the smallest label on a full tie.
        let mut best: Option<(&str, usize, f64)> = None;
        for (label, (votes, dist)) in tally {
            let better = match best {
                None => true,
                Some((_, bv, bd)) => votes > bv || (votes == bv && dist < bd),
            };
            if better {
                best = Some((label, votes, dist));
            }
        }
        Ok(best.expect("k_neighbors >= 1").0.to_string())
    }

    pub(crate) fn write(&self, w: &mut Writer<Vec<u8>>) -> Result<()> {
        w.bytes(KNN_MAGIC)?;
        w.u32(KNN_VERSION)?;
        w.u64(self.k_neighbors as u64)?;
        w.u64(self.dim() as u64)?;
        w.u64(self.histograms.len() as u64)?;
        for (h, l) in self.histograms.iter().zip(&self.labels) {
            w.str(l)?;
            w.f64s(h)?;
        }
        Ok(())
    }

    pub(crate) fn read(r: &mut Reader<&[u8]>) -> Result<Self> {
        r.magic(KNN_MAGIC)?;
        let version = r.u32()?;
        if version != KNN_VERSION {
            return Err(Error::Format(format!("unsupported KNN model version {version}")));
        }
        let k = r.usize()?;
        let dim = r.usize()?;
        let n = r.usize()?;
        let mut histograms = Vec::with_capacity(n.min(1 << 20));
        let mut labels = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            labels.push(r.str()?);
            histograms.push(r.f64s(dim)?);
        }
        Self::new(histograms, labels, k).map_err(|e| Error::Format(format!("invalid KNN model: {e}")))
    }
}
