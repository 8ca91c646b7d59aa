mod debug;
mod encode;
mod features;
mod layers;
mod model;
mod stats;
mod synth;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use attrib_core::dataio::{parse_transcript, read_dataset, read_features, BoldDataset};
use attrib_core::featurespace::{FeatureMatrix, StoryTranscript};
use attrib_core::tinylm::{load_model, Model, Vocabulary};

use crate::config::LoadedConfig;

pub use debug::{attributions, toy_data, ToyDataArgs};
pub use encode::{ceiling, encode};
pub use features::{features, FeatureSelection};
pub use layers::layers;
pub use model::train_lm;
pub use stats::stats;
pub use synth::synth;

/// A problem with the invocation or its inputs rather than with the
/// computation; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn require(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(usage(format!("{what} not found: {}", path.display())))
    }
}

fn load_transcript(cfg: &LoadedConfig) -> Result<StoryTranscript> {
    let path = &cfg.config.paths.transcript;
    require(path, "transcript")?;
    Ok(parse_transcript(path)?)
}

fn load_lm(cfg: &LoadedConfig) -> Result<(Model, Vocabulary)> {
    let path = cfg.model_path();
    require(&path, "model (run `train-lm` first)")?;
    let (model, vocab) = load_model(&path)?;
    let vocab = vocab.with_context(|| format!("model {} carries no vocabulary", path.display()))?;
    Ok((model, vocab))
}

fn load_bold(cfg: &LoadedConfig) -> Result<BoldDataset> {
    let dir = cfg.bold_dir();
    require(&dir, "BOLD directory (run `synth` or supply runs)")?;
    Ok(read_dataset(&dir)?)
}

fn features_dir(cfg: &LoadedConfig) -> PathBuf {
    cfg.output_dir().join("features")
}

fn features_path(cfg: &LoadedConfig, label: &str) -> PathBuf {
    features_dir(cfg).join(format!("{label}.feat"))
}

fn load_features(cfg: &LoadedConfig, label: &str) -> Result<FeatureMatrix> {
    let path = features_path(cfg, label);
    require(&path, &format!("feature file for {label} (run `features` first)"))?;
    Ok(read_features(&path)?)
}

/// Files in `dir` with extension `ext`, sorted by name.
fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .collect();
    out.sort();
    Ok(out)
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Every stage in order.
pub fn pipeline(cfg: &LoadedConfig) -> Result<()> {
    train_lm(cfg)?;
    features(cfg, &FeatureSelection::default())?;
    if cfg.config.synthetic.is_some() {
        synth(cfg)?;
    }
    encode(cfg)?;
    ceiling(cfg)?;
    stats(cfg)?;
    if cfg.config.feature_kinds.contains(&crate::config::KindName::Conductance) {
        layers(cfg)?;
    }
    Ok(())
}
