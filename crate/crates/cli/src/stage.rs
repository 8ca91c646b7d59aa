//! Staged artifact output. A subcommand writes into a private staging
//! directory; on success every file is renamed into place and a run
//! manifest is written, on failure the staging directory is removed.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use attrib_core::dataio::{BOLD_FORMAT_VERSION, FEATURES_FORMAT_VERSION};
use attrib_core::encoder::SCORES_FORMAT_VERSION;
use attrib_core::tinylm::MODEL_FORMAT_VERSION;
use serde::Serialize;

use crate::config::LoadedConfig;

pub struct Stage {
    name: String,
    staging: PathBuf,
    /// `(staged path, final path)`.
    files: Vec<(PathBuf, PathBuf)>,
    committed: bool,
}

impl Stage {
    pub fn begin(out_dir: &Path, name: &str) -> Result<Stage> {
        let staging = out_dir.join(format!(".staging-{name}"));
        if staging.exists() {
            fs::remove_dir_all(&staging).with_context(|| format!("cannot clear {}", staging.display()))?;
        }
        fs::create_dir_all(&staging).with_context(|| format!("cannot create {}", staging.display()))?;
        Ok(Stage { name: name.to_string(), staging, files: Vec::new(), committed: false })
    }

    /// A staging path for an artifact that will end up at `final_path`.
    pub fn file(&mut self, final_path: &Path) -> Result<PathBuf> {
        let staged = self
            .staging
            .join(format!("{:04}", self.files.len()))
            .join(final_path.file_name().context("artifact path has no file name")?);
        fs::create_dir_all(staged.parent().expect("has parent"))?;
        self.files.push((staged.clone(), final_path.to_path_buf()));
        Ok(staged)
    }

    /// Moves every staged file into place and writes the run manifest.
    pub fn commit(mut self, cfg: &LoadedConfig) -> Result<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.files.len());
        for (staged, target) in &self.files {
            if !staged.exists() {
                continue;
            }
            if let Some(dir) = target.parent() {
                fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            }
            if fs::rename(staged, target).is_err() {
                fs::copy(staged, target)
                    .with_context(|| format!("cannot move artifact to {}", target.display()))?;
            }
            written.push(target.clone());
        }
        let manifest = Manifest::new(&self.name, cfg, &written);
        let manifest_path = cfg.output_dir().join("manifests").join(format!("{}.json", self.name));
        fs::create_dir_all(manifest_path.parent().expect("has parent"))?;
        fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("cannot write {}", manifest_path.display()))?;
        self.committed = true;
        fs::remove_dir_all(&self.staging).ok();
        Ok(written)
    }
}

impl Drop for Stage {
    fn drop(&mut self) {
        if !self.committed {
            fs::remove_dir_all(&self.staging).ok();
        }
    }
}

#[derive(Serialize)]
struct Versions {
    attrib_encode: &'static str,
    model_format: u32,
    features_format: u32,
    bold_format: u32,
    scores_format: u32,
}

#[derive(Serialize)]
struct Manifest {
    subcommand: String,
    config_sha256: String,
    seed: u64,
    versions: Versions,
    config: serde_json::Value,
    artifacts: Vec<String>,
}

impl Manifest {
    fn new(name: &str, cfg: &LoadedConfig, written: &[PathBuf]) -> Manifest {
        let out = cfg.output_dir();
        let mut artifacts: Vec<String> =
            written.iter().map(|p| p.strip_prefix(out).unwrap_or(p).display().to_string()).collect();
        artifacts.sort();
        Manifest {
            subcommand: name.to_string(),
            config_sha256: cfg.hash.clone(),
            seed: cfg.config.seed,
            versions: Versions {
                attrib_encode: env!("CARGO_PKG_VERSION"),
                model_format: MODEL_FORMAT_VERSION,
                features_format: FEATURES_FORMAT_VERSION,
                bold_format: BOLD_FORMAT_VERSION,
                scores_format: SCORES_FORMAT_VERSION,
            },
            config: cfg.effective.clone(),
            artifacts,
        }
    }
}
