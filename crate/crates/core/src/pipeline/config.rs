use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::GmmConfig;
use crate::corpus::SynthConfig;
use crate::features::{FeatureConfig, FeatureKind};
use crate::fusion::FusionConfig;
use crate::viz::{PyknogramConfig, RenderStyle, SpectrogramConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Where `synth` writes and where the manifest is looked up by default.
    pub corpus_dir: PathBuf,
    pub work_dir: PathBuf,
    /// Defaults to `<corpus_dir>/manifest.tsv`.
    pub manifest: Option<PathBuf>,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            corpus_dir: "corpus".into(),
            work_dir: "work".into(),
            manifest: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub style: RenderStyle,
    pub spectrogram: SpectrogramConfig,
    pub pyknogram: PyknogramConfig,
}

/// Everything a pipeline run depends on. Relative paths are resolved
/// against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Feature systems to run, in report order.
    pub systems: Vec<FeatureKind>,
    pub paths: PathsConfig,
    pub corpus: SynthConfig,
    pub features: FeatureConfig,
    pub gmm: GmmConfig,
    pub fusion: FusionConfig,
    pub render: RenderConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            systems: FeatureKind::ALL.to_vec(),
            paths: PathsConfig::default(),
            corpus: SynthConfig::default(),
            features: FeatureConfig::default(),
            gmm: GmmConfig::default(),
            fusion: FusionConfig::default(),
            render: RenderConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| format!("byte {}", s.start))
                .unwrap_or_else(|| "config".into());
            Error::config(field, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML config and anchors relative paths at its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.paths.corpus_dir = base.join(&cfg.paths.corpus_dir);
        cfg.paths.work_dir = base.join(&cfg.paths.work_dir);
        cfg.paths.manifest = cfg.paths.manifest.map(|m| base.join(m));
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.systems.is_empty() {
            return Err(Error::config("systems", "list at least one feature system"));
        }
        let mut seen = self.systems.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.systems.len() {
            return Err(Error::config("systems", "duplicate feature system"));
        }
        self.corpus.validate()?;
        self.features.validate()?;
        self.gmm.validate()?;
        if !(self.fusion.tol > 0.0) {
            return Err(Error::config("fusion.tol", "must be positive"));
        }
        if !(self.fusion.l2 >= 0.0) {
            return Err(Error::config("fusion.l2", "must be non-negative"));
        }
        Ok(())
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.paths
            .manifest
            .clone()
            .unwrap_or_else(|| self.paths.corpus_dir.join("manifest.tsv"))
    }

    /// Identifies the feature settings; cached features and trained models
    /// carry it so stale artifacts are detected.
    pub fn feature_fingerprint(&self, kind: FeatureKind) -> String {
        digest(&[kind.as_str().as_bytes(), toml::to_string(&self.features).expect("serialises").as_bytes()])
    }

}

pub(crate) fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}
