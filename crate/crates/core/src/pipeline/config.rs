use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::ClassifierSpec;
use crate::codebook::{KmeansInit, KmeansParams};
use crate::descriptor::DescriptorMethod;
use crate::detector::DetectorParams;
use crate::error::{Error, Result};
use crate::gradient::RatioParams;
use crate::shape_context::ShapeContextParams;
use crate::transform::{TransformMethod, TransformParams};
use crate::video_io::DatasetManifest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorConfig {
    pub method: DescriptorMethod,
    #[serde(default)]
    pub shape_context: ShapeContextParams,
    /// Overrides the per-method transform defaults (dft, dct, dwt only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformParams>,
    #[serde(default)]
    pub ratio: RatioParams,
}

impl DescriptorConfig {
    pub fn new(method: DescriptorMethod) -> Self {
        Self { method, shape_context: ShapeContextParams::default(), transform: None, ratio: RatioParams::default() }
    }

    pub fn transform_method(&self) -> Option<TransformMethod> {
        match self.method {
            DescriptorMethod::Dft => Some(TransformMethod::Dft),
            DescriptorMethod::Dct => Some(TransformMethod::Dct),
            DescriptorMethod::Dwt => Some(TransformMethod::Dwt),
            _ => None,
        }
    }

    pub fn transform_params(&self) -> Option<TransformParams> {
        self.transform_method().map(|m| self.transform.unwrap_or_else(|| TransformParams::new(m)))
    }

    pub fn validate(&self) -> Result<()> {
        match (self.transform_method(), &self.transform) {
            (None, Some(_)) => {
                return Err(Error::invalid(format!("transform parameters given for method {}", self.method)))
            }
            (Some(m), Some(t)) if t.method != m => {
                return Err(Error::invalid(format!(
                    "transform method {:?} does not match descriptor method {}",
                    t.method, self.method
                )))
            }
            _ => {}
        }
        if self.method.is_structural() {
            self.shape_context.validate()?;
        }
        if matches!(self.method, DescriptorMethod::Hog | DescriptorMethod::Cog) {
            self.ratio.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookConfig {
    pub k: usize,
    #[serde(default = "default_init")]
    pub init: KmeansInit,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_init() -> KmeansInit {
    KmeansInit::PlusPlus
}
fn default_max_iters() -> usize {
    300
}
fn default_tol() -> f64 {
    1e-6
}

impl CodebookConfig {
    pub fn new(k: usize) -> Self {
        Self { k, init: default_init(), max_iters: default_max_iters(), tol: default_tol() }
    }

    pub fn params(&self, seed: u64) -> KmeansParams {
        KmeansParams { k: self.k, seed, max_iters: self.max_iters, tol: self.tol, init: self.init }
    }
}

/// Which manifest entries form the training and test sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitMode {
    /// Use the `split` column as given.
    #[default]
    Manifest,
    /// Subjects up to `max_train_subject` train, the rest test.
    Subject { max_train_subject: u32 },
}

impl SplitMode {
    pub fn apply(&self, manifest: &DatasetManifest) -> DatasetManifest {
        match *self {
            SplitMode::Manifest => manifest.clone(),
            SplitMode::Subject { max_train_subject } => manifest.resplit_by_subject(max_train_subject),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub detector: DetectorParams,
    pub descriptor: DescriptorConfig,
    /// Number of principal components, or `None` to skip PCA.
    #[serde(default)]
    pub pca_components: Option<usize>,
    pub codebook: CodebookConfig,
    #[serde(default)]
    pub classifier: ClassifierSpec,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_max_frames")]
    pub max_frames: usize,
    #[serde(default)]
    pub split: SplitMode,
    /// Base seed; run `i` uses `seed + i`.
    #[serde(default)]
    pub seed: u64,
}

fn default_runs() -> usize {
    20
}
fn default_max_frames() -> usize {
    300
}

impl ExperimentConfig {
    pub fn new(method: DescriptorMethod, k: usize) -> Self {
        Self {
            detector: DetectorParams::default(),
            descriptor: DescriptorConfig::new(method),
            pca_components: None,
            codebook: CodebookConfig::new(k),
            classifier: ClassifierSpec::default(),
            runs: default_runs(),
            max_frames: default_max_frames(),
            split: SplitMode::Manifest,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        self.descriptor.validate()?;
        if self.pca_components == Some(0) {
            return Err(Error::invalid("pca_components must be positive when set"));
        }
        if self.codebook.k == 0 {
            return Err(Error::invalid("codebook k must be at least 1"));
        }
        if self.runs == 0 {
            return Err(Error::invalid("runs must be at least 1"));
        }
        if self.max_frames == 0 {
            return Err(Error::invalid("max_frames must be at least 1"));
        }
        match &self.classifier {
            ClassifierSpec::Knn { k_neighbors: 0 } => Err(Error::invalid("k_neighbors must be at least 1")),
            ClassifierSpec::Svm { grid } => grid.validate(),
            _ => Ok(()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
