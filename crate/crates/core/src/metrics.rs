//! Confusion matrices, accuracy summaries and parameter sweeps.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{average_runs_on_features, extract_features, mean_std, ExperimentConfig, RunSummary};
use crate::video_io::DatasetManifest;

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(classes: Vec<String>) -> Self {
        let n = classes.len();
        Self { classes, counts: vec![vec![0; n]; n] }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// trace / total; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.trace() as f64 / t as f64,
        }
    }

    /// Each non-empty row divided by its sum; empty rows stay zero.
    pub fn row_normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|r| {
                let s: u64 = r.iter().sum();
                r.iter().map(|&c| if s == 0 { 0.0 } else { c as f64 / s as f64 }).collect()
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        labeled_csv(&self.classes, self.counts.iter().map(|r| r.iter().map(u64::to_string).collect()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

fn labeled_csv(classes: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["label".to_string()];
    header.extend(classes.iter().cloned());
    w.write_record(&header)?;
    for (class, row) in classes.iter().zip(rows) {
        let mut rec = vec![class.clone()];
        rec.extend(row);
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(format!("csv flush failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn confusion_from_predictions(truth: &[String], pred: &[String], classes: &[String]) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), actual: pred.len() });
    }
    let index = |l: &String| {
        classes
            .iter()
            .position(|c| c == l)
            .ok_or_else(|| Error::invalid(format!("unknown label '{l}'")))
    };
    let mut m = ConfusionMatrix::zeros(classes.to_vec());
    for (t, p) in truth.iter().zip(pred) {
        m.counts[index(t)?][index(p)?] += 1;
    }
    Ok(m)
}

/// Entry-wise mean of several confusion matrices over the same classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanConfusion {
    pub classes: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl MeanConfusion {
    pub fn from_runs(runs: &[ConfusionMatrix]) -> Result<Self> {
        let first = runs.first().ok_or_else(|| Error::invalid("no confusion matrices to average"))?;
        if runs.iter().any(|m| m.classes != first.classes) {
            return Err(Error::invalid("confusion matrices disagree on classes"));
        }
        let n = first.classes.len();
        let mut values = vec![vec![0.0; n]; n];
        for m in runs {
            for (vr, cr) in values.iter_mut().zip(&m.counts) {
                for (v, &c) in vr.iter_mut().zip(cr) {
                    *v += c as f64;
                }
            }
        }
        for v in values.iter_mut().flatten() {
            *v /= runs.len() as f64;
        }
        Ok(Self { classes: first.classes.clone(), values })
    }

    pub fn to_csv(&self) -> Result<String> {
        labeled_csv(&self.classes, self.values.iter().map(|r| r.iter().map(f64::to_string).collect()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

/// Contents of `accuracy.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub mean: f64,
    pub per_run: Vec<f64>,
    pub std: f64,
}

impl AccuracyReport {
    pub fn from_runs(per_run: Vec<f64>) -> Result<Self> {
        if per_run.is_empty() {
            return Err(Error::invalid("no accuracies to report"));
        }
        let (mean, std) = mean_std(&per_run);
        Ok(Self { mean, per_run, std })
    }

    pub fn from_summary(s: &RunSummary) -> Self {
        Self { mean: s.mean, per_run: s.per_run.clone(), std: s.std }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    NCuboids,
    CodebookK,
    Partitions,
    Distances,
    AngularBins,
    RadialBins,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::NCuboids => "n_cuboids",
            Self::CodebookK => "codebook_k",
            Self::Partitions => "partitions",
            Self::Distances => "distances",
            Self::AngularBins => "angular_bins",
            Self::RadialBins => "radial_bins",
        }
    }

    /// Copy of `config` with the swept field set to `value`.
    pub fn apply(self, config: &ExperimentConfig, value: usize) -> ExperimentConfig {
        let mut c = config.clone();
        match self {
            Self::NCuboids => c.detector.n_points = value,
            Self::CodebookK => c.codebook.k = value,
            Self::Partitions => c.descriptor.ratio.partitions = value,
            Self::Distances => c.descriptor.ratio.d_max = value,
            Self::AngularBins => c.descriptor.shape_context.n_angular = value,
            Self::RadialBins => c.descriptor.shape_context.n_radial = value,
        }
        c
    }

    /// Whether changing this axis leaves detection and description untouched.
    fn reuses_features(self) -> bool {
        matches!(self, Self::CodebookK)
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::NCuboids, Self::CodebookK, Self::Partitions, Self::Distances, Self::AngularBins, Self::RadialBins]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown sweep axis '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: usize,
    pub mean_accuracy: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    /// Strictly increasing in `value`.
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["axis", "value", "mean_accuracy", "std"])?;
        for p in &self.points {
            w.write_record([
                self.axis.name().to_string(),
                p.value.to_string(),
                p.mean_accuracy.to_string(),
                p.std.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(format!("csv flush failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

/// Averaged runs per axis value, values sorted ascending and deduplicated.
pub fn sweep(
    template: &ExperimentConfig,
    axis: SweepAxis,
    values: &[usize],
    manifest: &DatasetManifest,
    base_seed: u64,
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::invalid("sweep needs at least one value"));
    }
    let mut values = values.to_vec();
    values.sort_unstable();
    values.dedup();
    let shared = if axis.reuses_features() { Some(extract_features(template, manifest)?) } else { None };
    let mut points = Vec::with_capacity(values.len());
    for v in values {
        let config = axis.apply(template, v);
        config.validate()?;
        let summary = match &shared {
            Some(f) => average_runs_on_features(&config, f, base_seed)?,
            None => average_runs_on_features(&config, &extract_features(&config, manifest)?, base_seed)?,
        };
        log::info!("sweep {}={v}: mean accuracy {:.4}", axis.name(), summary.mean);
        points.push(SweepPoint { value: v, mean_accuracy: summary.mean, std: summary.std });
    }
    Ok(SweepResult { axis, points })
}
