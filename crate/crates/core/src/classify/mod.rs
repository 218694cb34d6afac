//! χ²-KNN and one-vs-one RBF-SVM classifiers over BoW histograms.

mod knn;
mod svm;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};

pub use knn::{chi2_distance, KnnModel};
pub use svm::{
    rbf_kernel, smo_solve, stratified_folds, svm_train_binary, BinarySvm, GridSearchSpec, PairModel,
    SmoSolution, SvmModel,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierSpec {
    Knn {
        #[serde(default = "default_k")]
        k_neighbors: usize,
    },
    Svm {
        #[serde(default)]
        grid: GridSearchSpec,
    },
}

fn default_k() -> usize {
    5
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        ClassifierSpec::Knn { k_neighbors: default_k() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Knn(KnnModel),
    Svm(SvmModel),
}

impl Classifier {
    /// `seed` drives the SVM cross-validation folds; KNN ignores it.
    pub fn train(spec: &ClassifierSpec, x: &[Vec<f64>], labels: &[String], seed: u64) -> Result<Self> {
        match spec {
            ClassifierSpec::Knn { k_neighbors } => {
                Ok(Classifier::Knn(KnnModel::new(x.to_vec(), labels.to_vec(), *k_neighbors)?))
            }
            ClassifierSpec::Svm { grid } => Ok(Classifier::Svm(SvmModel::train(x, labels, grid, seed)?)),
        }
    }

    pub fn predict(&self, h: &[f64]) -> Result<String> {
        match self {
            Classifier::Knn(m) => m.predict(h),
            Classifier::Svm(m) => m.predict(h),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = Writer::new(Vec::new());
        match self {
            Classifier::Knn(m) => m.write(&mut w)?,
            Classifier::Svm(m) => m.write(&mut w)?,
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let model = if bytes.starts_with(knn::KNN_MAGIC) {
            let mut r = Reader::new(bytes);
            let m = KnnModel::read(&mut r)?;
            r.end()?;
            Classifier::Knn(m)
        } else if bytes.starts_with(svm::SVM_MAGIC) {
            let mut r = Reader::new(bytes);
            let m = SvmModel::read(&mut r)?;
            r.end()?;
            Classifier::Svm(m)
        } else {
            return Err(Error::Format("not a classifier model file".into()));
        };
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}
