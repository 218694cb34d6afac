//! Detect → describe → PCA → codebook → encode → classify → evaluate.

mod config;
mod stages;

use rayon::prelude::*;

use crate::classify::Classifier;
use crate::codebook::{bow_encode, kmeans_fit, BowHistogram, Codebook};
use crate::descriptor::DescriptorMethod;
use crate::detector::{detect_interest_points, extract_cuboid, response_function, PointCloud};
use crate::error::{Error, Result, Stage, StageExt};
use crate::gradient::{cog_descriptor, gradient_concat_descriptor, hog_ratio_descriptor};
use crate::metrics::{confusion_from_predictions, ConfusionMatrix, MeanConfusion};
use crate::pca::{pca_fit, PcaModel};
use crate::shape_context::{projected_3dsc_descriptors, sc3d_descriptors};
use crate::transform::transform_descriptor;
use crate::video_io::{load_source, DatasetManifest, ManifestEntry, Split, VideoVolume};

pub use config::{CodebookConfig, DescriptorConfig, ExperimentConfig, SplitMode};
pub use stages::{
    stage_codebook, stage_describe, stage_detect, stage_encode, stage_eval, stage_pca, stage_predict, stage_run,
    read_histograms, stage_train, write_run_outputs, HistogramRow, WorkDir,
};

/// Descriptors of one sequence, computed once and reused across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceFeatures {
    pub sequence_id: String,
    pub label: String,
    pub split: Split,
    pub cloud: PointCloud,
    pub descriptors: Vec<Vec<f64>>,
}

/// Detection on a loaded volume.
pub fn detect_volume(volume: &VideoVolume, config: &ExperimentConfig) -> Result<PointCloud> {
    let response = response_function(volume, &config.detector)?;
    Ok(detect_interest_points(&response, &config.detector))
}

/// Descriptors of a volume at the given interest points: one per point for
/// shape contexts, one per cuboid otherwise.
pub fn describe_volume(volume: &VideoVolume, cloud: &PointCloud, config: &ExperimentConfig) -> Result<Vec<Vec<f64>>> {
    let dc = &config.descriptor;
    if dc.method.is_structural() {
        if cloud.len() < 2 {
            log::warn!("{} interest point(s): too few for a shape context", cloud.len());
            return Ok(Vec::new());
        }
        let ds = match dc.method {
            DescriptorMethod::Sc3d => sc3d_descriptors(cloud, &dc.shape_context)?,
            _ => projected_3dsc_descriptors(cloud, &dc.shape_context)?,
        };
        return Ok(ds.into_iter().map(|d| d.values).collect());
    }
    cloud
        .points
        .iter()
        .map(|p| {
            let cuboid = extract_cuboid(volume, p, &config.detector)?;
            let d = match dc.method {
                DescriptorMethod::Dft | DescriptorMethod::Dct | DescriptorMethod::Dwt => {
                    transform_descriptor(&cuboid, &dc.transform_params().expect("transform method"))?
                }
                DescriptorMethod::Grad3d => gradient_concat_descriptor(&cuboid)?,
                DescriptorMethod::Hog => hog_ratio_descriptor(&cuboid, &dc.ratio)?,
                DescriptorMethod::Cog => cog_descriptor(&cuboid, &dc.ratio)?,
                DescriptorMethod::Sc3d | DescriptorMethod::Psc3d => unreachable!(),
            };
            Ok(d.values)
        })
        .collect()
}

/// Loads, detects and describes one manifest entry.
pub fn sequence_features(
    manifest: &DatasetManifest,
    entry: &ManifestEntry,
    config: &ExperimentConfig,
) -> Result<SequenceFeatures> {
    let context = |e: Error| Error::InvalidInput(format!("sequence {}: {e}", entry.sequence_id));
    let volume = load_source(&manifest.locator(entry), config.max_frames)
        .map_err(context)
        .stage(Stage::Load)?;
    let cloud = detect_volume(&volume, config).map_err(context).stage(Stage::Detect)?;
    let descriptors = describe_volume(&volume, &cloud, config)
        .map_err(context)
        .stage(Stage::Describe)?;
    Ok(SequenceFeatures {
        sequence_id: entry.sequence_id.clone(),
        label: entry.label.clone(),
        split: entry.split,
        cloud,
        descriptors,
    })
}

/// Features for every entry, in manifest order, after applying the split mode.
pub fn extract_features(config: &ExperimentConfig, manifest: &DatasetManifest) -> Result<Vec<SequenceFeatures>> {
    config.validate()?;
    let manifest = config.split.apply(manifest);
    manifest
        .entries()
        .par_iter()
        .map(|e| sequence_features(&manifest, e, config))
        .collect()
}

/// Outcome of one seeded run over precomputed features.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    /// (sequence id, true label, predicted label) for each test sequence.
    pub predictions: Vec<(String, String, String)>,
    /// Sequences whose descriptors fitted PCA and the codebook.
    pub fit_sequence_ids: Vec<String>,
}

/// Fitted PCA and codebook of one run.
#[derive(Debug, Clone)]
pub struct FittedVocabulary {
    pub pca: Option<PcaModel>,
    pub codebook: Codebook,
}

impl FittedVocabulary {
    pub fn encode(&self, descriptors: &[Vec<f64>]) -> Result<BowHistogram> {
        if descriptors.is_empty() {
            log::warn!("sequence without descriptors encodes as an empty histogram");
            return Ok(BowHistogram { sequence_id: String::new(), counts: vec![0; self.codebook.k()] });
        }
        match &self.pca {
            Some(p) => {
                let projected = descriptors.iter().map(|d| p.project(d)).collect::<Result<Vec<_>>>()?;
                bow_encode(&self.codebook, &projected)
            }
            None => bow_encode(&self.codebook, descriptors),
        }
    }
}

/// Fits PCA (optional) and the codebook on training descriptors only.
pub fn fit_vocabulary(
    config: &ExperimentConfig,
    train_descriptors: &[Vec<f64>],
    seed: u64,
) -> Result<FittedVocabulary> {
    if train_descriptors.is_empty() {
        return Err(Error::invalid("no training descriptors").at(Stage::Codebook));
    }
    let pca = match config.pca_components {
        Some(n) => Some(pca_fit(train_descriptors, n).stage(Stage::Pca)?),
        None => None,
    };
    let codebook = match &pca {
        Some(p) => {
            let projected = train_descriptors.iter().map(|d| p.project(d)).collect::<Result<Vec<_>>>().stage(Stage::Pca)?;
            kmeans_fit(&projected, &config.codebook.params(seed))
        }
        None => kmeans_fit(train_descriptors, &config.codebook.params(seed)),
    }
    .stage(Stage::Codebook)?;
    Ok(FittedVocabulary { pca, codebook })
}

/// Seed for cross-validation folds, decorrelated from the codebook seed.
pub fn classifier_seed(run_seed: u64) -> u64 {
    run_seed ^ 0x9E37_79B9_7F4A_7C15
}

/// One run on precomputed features.
pub fn run_on_features(
    config: &ExperimentConfig,
    features: &[SequenceFeatures],
    run_seed: u64,
) -> Result<RunResult> {
    let train: Vec<&SequenceFeatures> = features.iter().filter(|f| f.split == Split::Train).collect();
    let test: Vec<&SequenceFeatures> = features.iter().filter(|f| f.split == Split::Test).collect();
    if train.is_empty() || test.is_empty() {
        return Err(Error::invalid("manifest needs both train and test sequences"));
    }
    let pooled: Vec<Vec<f64>> = train.iter().flat_map(|f| f.descriptors.iter().cloned()).collect();
    let vocab = fit_vocabulary(config, &pooled, run_seed)?;

    let encode = |set: &[&SequenceFeatures]| -> Result<Vec<Vec<f64>>> {
        set.par_iter()
            .map(|f| vocab.encode(&f.descriptors).map(|h| h.to_f64()))
            .collect::<Result<Vec<_>>>()
            .stage(Stage::Encode)
    };
    let train_x = encode(&train)?;
    let test_x = encode(&test)?;
    let train_y: Vec<String> = train.iter().map(|f| f.label.clone()).collect();
    let model = Classifier::train(&config.classifier, &train_x, &train_y, classifier_seed(run_seed))
        .stage(Stage::Train)?;
    let predicted = test_x
        .iter()
        .map(|h| model.predict(h))
        .collect::<Result<Vec<_>>>()
        .stage(Stage::Predict)?;

    let mut classes: Vec<String> = features.iter().map(|f| f.label.clone()).collect();
    classes.sort();
    classes.dedup();
    let truth: Vec<String> = test.iter().map(|f| f.label.clone()).collect();
    let confusion = confusion_from_predictions(&truth, &predicted, &classes).stage(Stage::Evaluate)?;
    let accuracy = confusion.accuracy();
    let predictions = test
        .iter()
        .zip(predicted)
        .map(|(f, p)| (f.sequence_id.clone(), f.label.clone(), p))
        .collect();
    Ok(RunResult {
        confusion,
        accuracy,
        predictions,
        fit_sequence_ids: train.iter().map(|f| f.sequence_id.clone()).collect(),
    })
}

/// Full pipeline for one run seed.
pub fn run_experiment(config: &ExperimentConfig, manifest: &DatasetManifest, run_seed: u64) -> Result<RunResult> {
    let features = extract_features(config, manifest)?;
    run_on_features(config, &features, run_seed)
}

/// Accuracy statistics over `config.runs` seeded runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
    pub per_run: Vec<f64>,
    pub mean_confusion: MeanConfusion,
    pub runs: Vec<RunResult>,
}

pub fn summarize_runs(runs: Vec<RunResult>) -> Result<RunSummary> {
    if runs.is_empty() {
        return Err(Error::invalid("no runs to summarize"));
    }
    let per_run: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
    let (mean, std) = mean_std(&per_run);
    let mean_confusion = MeanConfusion::from_runs(&runs.iter().map(|r| r.confusion.clone()).collect::<Vec<_>>())?;
    Ok(RunSummary { mean, std, per_run, mean_confusion, runs })
}

/// Runs `config.runs` times on shared features with seeds `base_seed + i`.
pub fn average_runs_on_features(
    config: &ExperimentConfig,
    features: &[SequenceFeatures],
    base_seed: u64,
) -> Result<RunSummary> {
    let runs = (0..config.runs as u64)
        .into_par_iter()
        .map(|i| run_on_features(config, features, base_seed.wrapping_add(i)))
        .collect::<Result<Vec<_>>>()?;
    summarize_runs(runs)
}

pub fn average_runs(config: &ExperimentConfig, manifest: &DatasetManifest, base_seed: u64) -> Result<RunSummary> {
    let features = extract_features(config, manifest)?;
    average_runs_on_features(config, &features, base_seed)
}

/// Arithmetic mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
