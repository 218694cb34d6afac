use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub sequence_id: String,
    pub path: String,
    pub label: String,
    pub subject: u32,
    pub split: Split,
}

/// A labeled list of sequences with subject-disjoint train/test splits.
#[derive(Debug, Clone, Default)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
    base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        Self::with_base_dir(entries, PathBuf::new())
    }

    /// Relative frame paths are resolved against `base_dir`.
    pub fn with_base_dir(entries: Vec<ManifestEntry>, base_dir: PathBuf) -> Result<Self> {
        let mut ids = HashSet::new();
        let mut subject_split = BTreeMap::new();
        for e in &entries {
            if !ids.insert(e.sequence_id.as_str()) {
                return Err(Error::invalid(format!("duplicate sequence_id '{}'", e.sequence_id)));
            }
            if e.label.is_empty() {
                return Err(Error::invalid(format!("sequence '{}' has no label", e.sequence_id)));
            }
            match subject_split.insert(e.subject, e.split) {
                Some(prev) if prev != e.split => {
                    return Err(Error::invalid(format!(
                        "subject {} appears in both train and test",
                        e.subject
                    )));
                }
                _ => {}
            }
        }
        Ok(Self { entries, base_dir })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(path, io),
                other => Error::Format(format!("{}: {other:?}", path.display())),
            })?;
        let headers = reader.headers()?.clone();
        let expected = ["sequence_id", "path", "label", "subject", "split"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Format(format!(
                "manifest header must be '{}'",
                expected.join(",")
            )));
        }
        let entries = reader.deserialize().collect::<std::result::Result<Vec<ManifestEntry>, _>>()?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::with_base_dir(entries, base)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for e in &self.entries {
            w.serialize(e)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn of_split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|e| e.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// The locator passed to the frame loader for an entry.
    pub fn locator(&self, entry: &ManifestEntry) -> String {
        let p = Path::new(&entry.path);
        if entry.path.starts_with("synthetic:") || p.is_absolute() || self.base_dir.as_os_str().is_empty() {
            entry.path.clone()
        } else {
            self.base_dir.join(p).to_string_lossy().into_owned()
        }
    }

    /// Returns a copy with every entry's split reassigned by subject id.
    pub fn resplit_by_subject(&self, max_train_subject: u32) -> Self {
        let entries = self
            .entries
            .iter()
            .cloned()
            .map(|mut e| {
                e.split = if e.subject <= max_train_subject { Split::Train } else { Split::Test };
                e
            })
            .collect();
        Self { entries, base_dir: self.base_dir.clone() }
    }
}

/// KTH protocol split: subjects 1..=16 train, 17..=25 test.
pub fn split_kth(manifest: &DatasetManifest) -> (Vec<ManifestEntry>, Vec<ManifestEntry>) {
    const TRAIN_SUBJECTS: u32 = 16;
    const ALL_SUBJECTS: u32 = 25;
    let present: BTreeSet<u32> = manifest.entries.iter().map(|e| e.subject).collect();
    let missing: Vec<u32> = (1..=ALL_SUBJECTS).filter(|s| !present.contains(s)).collect();
    if !missing.is_empty() {
        log::warn!("manifest lacks KTH subjects {missing:?}; splitting by subject id anyway");
    }
    manifest
        .entries
        .iter()
        .cloned()
        .partition(|e| e.subject <= TRAIN_SUBJECTS)
}
