//! File-checkpointed pipeline stages backing the command-line tool.
//!
//! Layout under the output directory:
//! `points/<id>.csv`, `descriptors/<id>.stdf`, `pca.bin`, `codebook.bin`,
//! `histograms.csv`, `model.bin`, `predictions.csv`, `confusion.csv`,
//! `accuracy.json`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{
    average_runs_on_features, classifier_seed, describe_volume, detect_volume, extract_features, FittedVocabulary,
    RunSummary,
};
use crate::classify::Classifier;
use crate::codebook::{kmeans_fit, Codebook};
use crate::descriptor::{read_descriptor_file, write_descriptor_file};
use crate::detector::PointCloud;
use crate::error::{Error, Result, Stage, StageExt};
use crate::metrics::{confusion_from_predictions, AccuracyReport};
use crate::pca::{pca_fit, PcaModel};
use crate::pipeline::ExperimentConfig;
use crate::video_io::{load_source, DatasetManifest, ManifestEntry, Split};

#[derive(Debug, Clone)]
pub struct WorkDir {
    root: PathBuf,
}

impl WorkDir {
    pub fn create(root: &Path) -> Result<Self> {
        for sub in ["", "points", "descriptors"] {
            let p = root.join(sub);
            std::fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn points(&self, id: &str) -> PathBuf {
        self.root.join("points").join(format!("{id}.csv"))
    }

    pub fn descriptors(&self, id: &str) -> PathBuf {
        self.root.join("descriptors").join(format!("{id}.stdf"))
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
}

fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!("sequence id '{id}' is not usable as a file name")))
    }
}

fn prepared(config: &ExperimentConfig, manifest: &DatasetManifest) -> Result<DatasetManifest> {
    config.validate()?;
    let m = config.split.apply(manifest);
    for e in m.entries() {
        check_id(&e.sequence_id)?;
    }
    Ok(m)
}

fn load_entry(manifest: &DatasetManifest, e: &ManifestEntry, config: &ExperimentConfig) -> Result<crate::video_io::VideoVolume> {
    load_source(&manifest.locator(e), config.max_frames)
        .map_err(|err| Error::InvalidInput(format!("sequence {}: {err}", e.sequence_id)))
        .stage(Stage::Load)
}

/// Writes `points/<id>.csv` for every sequence.
pub fn stage_detect(config: &ExperimentConfig, manifest: &DatasetManifest, work: &WorkDir) -> Result<()> {
    let m = prepared(config, manifest).stage(Stage::Detect)?;
    m.entries().par_iter().try_for_each(|e| {
        let volume = load_entry(&m, e, config)?;
        let cloud = detect_volume(&volume, config).stage(Stage::Detect)?;
        log::info!("{}: {} interest points", e.sequence_id, cloud.len());
        cloud.write_csv(&work.points(&e.sequence_id)).stage(Stage::Detect)
    })
}

/// Writes `descriptors/<id>.stdf`, reusing detection checkpoints when present.
pub fn stage_describe(config: &ExperimentConfig, manifest: &DatasetManifest, work: &WorkDir) -> Result<()> {
    let m = prepared(config, manifest).stage(Stage::Describe)?;
    m.entries().par_iter().try_for_each(|e| {
        let volume = load_entry(&m, e, config)?;
        let points = work.points(&e.sequence_id);
        let cloud = if points.exists() {
            PointCloud::read_csv(&points, volume.dims()).stage(Stage::Describe)?
        } else {
            detect_volume(&volume, config).stage(Stage::Detect)?
        };
        let ds = describe_volume(&volume, &cloud, config).stage(Stage::Describe)?;
        let dim = ds.first().map_or(0, Vec::len);
        write_descriptor_file(&work.descriptors(&e.sequence_id), dim, &ds).stage(Stage::Describe)
    })
}

fn load_descriptors(work: &WorkDir, ids: &[&ManifestEntry], stage: Stage) -> Result<Vec<Vec<Vec<f64>>>> {
    ids.iter()
        .map(|e| read_descriptor_file(&work.descriptors(&e.sequence_id)).map(|(_, rows)| rows))
        .collect::<Result<Vec<_>>>()
        .stage(stage)
}

fn train_descriptors(config: &ExperimentConfig, manifest: &DatasetManifest, work: &WorkDir, stage: Stage) -> Result<Vec<Vec<f64>>> {
    let m = prepared(config, manifest).stage(stage)?;
    let train: Vec<&ManifestEntry> = m.of_split(Split::Train).collect();
    Ok(load_descriptors(work, &train, stage)?.into_iter().flatten().collect())
}

/// Fits `pca.bin` on training descriptors; removes a stale model when PCA is off.
pub fn stage_pca(config: &ExperimentConfig, manifest: &DatasetManifest, work: &WorkDir) -> Result<()> {
    let path = work.file("pca.bin");
    let Some(n) = config.pca_components else {
        log::info!("PCA disabled in the configuration");
        if path.exists() {
            std::fs::remove_file(&path).map_err(|e| Error::io(&path, e)).stage(Stage::Pca)?;
        }
        return Ok(());
    };
    let data = train_descriptors(config, manifest, work, Stage::Pca)?;
    pca_fit(&data, n).and_then(|p| p.save(&path)).stage(Stage::Pca)
}

fn load_pca(config: &ExperimentConfig, work: &WorkDir, stage: Stage) -> Result<Option<PcaModel>> {
    if config.pca_components.is_none() {
        return Ok(None);
    }
    PcaModel::load(&work.file("pca.bin")).map(Some).stage(stage)
}

/// Fits `codebook.bin` on (projected) training descriptors.
pub fn stage_codebook(config: &ExperimentConfig, manifest: &DatasetManifest, work: &WorkDir, seed: u64) -> Result<()> {
    let mut data = train_descriptors(config, manifest, work, Stage::Codebook)?;
    if let Some(p) = load_pca(config, work, Stage::Codebook)? {
        data = data.iter().map(|d| p.project(d)).collect::<Result<_>>().stage(Stage::Pca)?;
    }
    kmeans_fit(&data, &config.codebook.params(seed))
        .and_then(|cb| cb.save(&work.file("codebook.bin")))
        .stage(Stage::Codebook)
}

/// One row of `histograms.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramRow {
    pub sequence_id: String,
    pub label: String,
    pub split: Split,
    pub counts: Vec<u32>,
}

fn split_name(s: Split) -> &'static str {
    match s {
        Split::Train => "train",
        Split::Test => "test",
    }
}

fn write_histograms(path: &Path, rows: &[HistogramRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let k = rows.first().map_or(0, |r| r.counts.len());
    let mut header = vec!["sequence_id".to_string(), "label".into(), "split".into()];
    header.extend((0..k).map(|i| format!("w{i}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.sequence_id.clone(), r.label.clone(), split_name(r.split).to_string()];
        rec.extend(r.counts.iter().map(u32::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_histograms(path: &Path) -> Result<Vec<HistogramRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() < 3 {
            return Err(Error::Format("histogram row too short".into()));
        }
        let split = match &rec[2] {
            "train" => Split::Train,
            "test" => Split::Test,
            other => return Err(Error::Format(format!("unknown split '{other}'"))),
        };
        let counts = rec
            .iter()
            .skip(3)
            .map(|c| c.parse().map_err(|_| Error::Format(format!("bad count '{c}'"))))
            .collect::<Result<Vec<u32>>>()?;
        rows.push(HistogramRow { sequence_id: rec[0].to_string(), label: rec[1].to_string(), split, counts });
    }
    Ok(rows)
}

/// Writes `histograms.csv` for every sequence.
pub fn stage_encode(config: &ExperimentConfig, manifest: &DatasetManifest, work: &WorkDir) -> Result<()> {
    let m = prepared(config, manifest).stage(Stage::Encode)?;
    let vocab = FittedVocabulary {
        pca: load_pca(config, work, Stage::Encode)?,
        codebook: Codebook::load(&work.file("codebook.bin")).stage(Stage::Encode)?,
    };
    let entries: Vec<&ManifestEntry> = m.entries().iter().collect();
    let descriptors = load_descriptors(work, &entries, Stage::Encode)?;
    let rows = entries
        .iter()
        .zip(&descriptors)
        .map(|(e, ds)| {
            Ok(HistogramRow {
                sequence_id: e.sequence_id.clone(),
                label: e.label.clone(),
                split: e.split,
                counts: vocab.encode(ds)?.counts,
            })
        })
        .collect::<Result<Vec<_>>>()
        .stage(Stage::Encode)?;
    write_histograms(&work.file("histograms.csv"), &rows).stage(Stage::Encode)
}

fn to_f64(counts: &[u32]) -> Vec<f64> {
    counts.iter().map(|&c| c as f64).collect()
}

/// Trains `model.bin` from the training rows of `histograms.csv`.
pub fn stage_train(config: &ExperimentConfig, work: &WorkDir, seed: u64) -> Result<()> {
    config.validate().stage(Stage::Train)?;
    let rows = read_histograms(&work.file("histograms.csv")).stage(Stage::Train)?;
    let train: Vec<&HistogramRow> = rows.iter().filter(|r| r.split == Split::Train).collect();
    let x: Vec<Vec<f64>> = train.iter().map(|r| to_f64(&r.counts)).collect();
    let y: Vec<String> = train.iter().map(|r| r.label.clone()).collect();
    Classifier::train(&config.classifier, &x, &y, classifier_seed(seed))
        .and_then(|m| m.save(&work.file("model.bin")))
        .stage(Stage::Train)
}

/// Writes `predictions.csv` (sequence_id,truth,predicted) for the test rows.
pub fn stage_predict(work: &WorkDir) -> Result<()> {
    let model = Classifier::load(&work.file("model.bin")).stage(Stage::Predict)?;
    let rows = read_histograms(&work.file("histograms.csv")).stage(Stage::Predict)?;
    let path = work.file("predictions.csv");
    let mut w = csv::Writer::from_path(&path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
        .stage(Stage::Predict)?;
    let write = |w: &mut csv::Writer<std::fs::File>| -> Result<()> {
        w.write_record(["sequence_id", "truth", "predicted"])?;
        for r in rows.iter().filter(|r| r.split == Split::Test) {
            let p = model.predict(&to_f64(&r.counts))?;
            w.write_record([r.sequence_id.as_str(), r.label.as_str(), p.as_str()])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))
    };
    write(&mut w).stage(Stage::Predict)
}

/// Writes `confusion.csv` and `accuracy.json` from `predictions.csv`.
pub fn stage_eval(manifest: &DatasetManifest, work: &WorkDir) -> Result<f64> {
    let path = work.file("predictions.csv");
    let eval = || -> Result<f64> {
        let mut r = csv::Reader::from_path(&path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let (mut truth, mut pred) = (Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(Error::Format("predictions row must have 3 fields".into()));
            }
            truth.push(rec[1].to_string());
            pred.push(rec[2].to_string());
        }
        let m = confusion_from_predictions(&truth, &pred, &manifest.classes())?;
        m.write_csv(&work.file("confusion.csv"))?;
        AccuracyReport::from_runs(vec![m.accuracy()])?.write_json(&work.file("accuracy.json"))?;
        Ok(m.accuracy())
    };
    eval().stage(Stage::Evaluate)
}

/// Writes `confusion.csv` (mean over runs) and `accuracy.json`.
pub fn write_run_outputs(summary: &RunSummary, work: &WorkDir) -> Result<()> {
    summary.mean_confusion.write_csv(&work.file("confusion.csv"))?;
    AccuracyReport::from_summary(summary).write_json(&work.file("accuracy.json"))
}

/// All stages in memory for `config.runs` seeds, then the run outputs.
pub fn stage_run(config: &ExperimentConfig, manifest: &DatasetManifest, work: &WorkDir, base_seed: u64) -> Result<RunSummary> {
    prepared(config, manifest)?;
    let features = extract_features(config, manifest)?;
    let summary = average_runs_on_features(config, &features, base_seed)?;
    write_run_outputs(&summary, work).stage(Stage::Evaluate)?;
    Ok(summary)
}
