//! Bag-of-words human action recognition from spatio-temporal interest points.
//!
//! Stages: [`video_io`] loads grayscale volumes, [`detector`] finds interest
//! points and cuboids, the descriptor modules ([`shape_context`],
//! [`transform`], [`gradient`]) turn them into vectors, [`pca`] optionally
//! reduces them, [`codebook`] quantizes them into word histograms,
//! [`classify`] labels the histograms and [`metrics`] scores the result.
//! [`pipeline`] ties the stages together.

mod binio;
pub mod classify;
pub mod codebook;
pub mod descriptor;
pub mod detector;
pub mod error;
pub mod gradient;
pub mod grid;
pub mod metrics;
pub mod pca;
pub mod pipeline;
pub mod shape_context;
pub mod transform;
pub mod video_io;

pub use classify::{chi2_distance, Classifier, ClassifierSpec, GridSearchSpec, KnnModel, SvmModel};
pub use codebook::{assign_word, bow_encode, kmeans_fit, BowHistogram, Codebook, KmeansInit, KmeansParams};
pub use descriptor::{Descriptor, DescriptorMethod};
pub use detector::{detect, Cuboid, DetectorParams, InterestPoint, PointCloud};
pub use error::{Error, Result, Stage};
pub use grid::{Grid2, Grid3};
pub use metrics::{confusion_from_predictions, sweep, AccuracyReport, ConfusionMatrix, SweepAxis, SweepResult};
pub use pca::{pca_fit, pca_project, PcaModel};
pub use pipeline::{average_runs, run_experiment, ExperimentConfig, RunResult, RunSummary};
pub use video_io::{split_kth, DatasetManifest, ManifestEntry, Split, VideoVolume};
