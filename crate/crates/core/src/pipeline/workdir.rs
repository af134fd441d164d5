use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::Partition;
use crate::features::FeatureKind;
use crate::{Error, Result};

/// Fixed artifact layout under a work directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkDir {
    root: PathBuf,
}

impl WorkDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        WorkDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn features_dir(&self, kind: FeatureKind) -> PathBuf {
        self.root.join("features").join(kind.as_str())
    }

    pub fn feature_path(&self, kind: FeatureKind, utt_id: &str) -> PathBuf {
        self.features_dir(kind).join(format!("{utt_id}.mskf"))
    }

    pub fn feature_index(&self, kind: FeatureKind) -> PathBuf {
        self.features_dir(kind).join("index.tsv")
    }

    pub fn model_path(&self, kind: FeatureKind) -> PathBuf {
        self.root.join("models").join(format!("{}.gmm", kind.as_str()))
    }

    pub fn fusion_path(&self) -> PathBuf {
        self.root.join("models").join("fusion.txt")
    }

    /// `system` is a feature kind name or `fusion`.
    pub fn scores_path(&self, system: &str, part: Partition) -> PathBuf {
        self.root.join("scores").join(format!("{system}_{part}.tsv"))
    }

    pub fn predictions_path(&self, system: &str, part: Partition) -> PathBuf {
        self.root.join("scores").join(format!("{system}_{part}.pred.tsv"))
    }

    pub fn report_path(&self) -> PathBuf {
        self.root.join("reports").join("uar.txt")
    }
}

pub(crate) fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        _ => Ok(()),
    }
}
