//! Pipeline configuration: a JSON file, optionally patched by
//! `--override dotted.key=value` flags. Relative paths are resolved against
//! the config file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use attrib_core::attribution::{Method, Reduction};
use attrib_core::dataio::HrfParams;
use attrib_core::encoder::{EncodingConfig, DEFAULT_CEILING_EPSILON};
use attrib_core::featurespace::AttributionSettings;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub transcript: PathBuf,
    pub output_dir: PathBuf,
    /// Defaults to `<output_dir>/model.bin`.
    #[serde(default)]
    pub model: Option<PathBuf>,
    /// Directory of `.bold` runs; defaults to `<output_dir>/bold`.
    #[serde(default)]
    pub bold_dir: Option<PathBuf>,
    #[serde(default)]
    pub roi_labels: Option<PathBuf>,
    #[serde(default)]
    pub pos_tags: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub n_layers: usize,
    pub n_heads: usize,
    pub d_model: usize,
    pub d_ff: usize,
    pub max_seq_len: usize,
    /// Words longer than this become two tokens.
    pub split_len: usize,
    pub train_steps: usize,
    pub learning_rate: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            n_layers: 2,
            n_heads: 2,
            d_model: 16,
            d_ff: 32,
            max_seq_len: 32,
            split_len: 8,
            train_steps: 300,
            learning_rate: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Attribution,
    Conductance,
    Attention,
    Activation,
}

impl KindName {
    pub fn parse(s: &str) -> Result<KindName> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| anyhow!("unknown feature kind {s:?}"))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivationSection {
    /// Defaults to the last layer.
    pub layer: Option<usize>,
    /// Defaults to the model's `max_seq_len`.
    pub context_len: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    /// Feature label, e.g. `attribution_grad_norm` or `conductance_l1`.
    pub features: String,
    pub share: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub n_subjects: usize,
    pub n_voxels: usize,
    pub n_trs: usize,
    pub tr_s: f64,
    pub signal_voxel_fraction: f64,
    pub snr: f64,
    #[serde(default)]
    pub shared_noise_fraction: f64,
    #[serde(default)]
    pub hrf: HrfParams,
    pub sources: Vec<SourceSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    /// FDR level for voxel significance.
    pub q: f64,
    /// FDR level for the layer sweep.
    pub layer_q: f64,
    pub ceiling_folds: usize,
    pub ceiling_epsilon: f64,
    pub importance_reduction: Reduction,
}

impl Default for StatsSection {
    fn default() -> Self {
        StatsSection {
            q: 0.05,
            layer_q: 0.01,
            ceiling_folds: 5,
            ceiling_epsilon: DEFAULT_CEILING_EPSILON,
            importance_reduction: Reduction::Mean,
        }
    }
}

fn default_kinds() -> Vec<KindName> {
    vec![KindName::Attribution, KindName::Conductance, KindName::Attention, KindName::Activation]
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub paths: Paths,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default = "default_kinds")]
    pub feature_kinds: Vec<KindName>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub attribution: AttributionSettings,
    #[serde(default)]
    pub activation: ActivationSection,
    #[serde(default)]
    pub encoder: EncodingConfig,
    #[serde(default)]
    pub synthetic: Option<SyntheticSection>,
    #[serde(default)]
    pub stats: StatsSection,
}

/// A parsed configuration with absolute paths and its content hash.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: PipelineConfig,
    /// SHA-256 of the effective configuration (after overrides).
    pub hash: String,
    pub effective: Value,
}

impl LoadedConfig {
    pub fn output_dir(&self) -> &Path {
        &self.config.paths.output_dir
    }

    pub fn model_path(&self) -> PathBuf {
        self.config.paths.model.clone().unwrap_or_else(|| self.output_dir().join("model.bin"))
    }

    pub fn bold_dir(&self) -> PathBuf {
        self.config.paths.bold_dir.clone().unwrap_or_else(|| self.output_dir().join("bold"))
    }
}

/// Sets `dotted.key` in `root` to `raw`, parsed as JSON when possible and as
/// a plain string otherwise. Intermediate objects are created as needed.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) =
        assignment.split_once('=').ok_or_else(|| anyhow!("override {assignment:?} is not key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("override key {key:?} has an empty component");
    }
    for (i, part) in parts.iter().enumerate() {
        let obj = match node {
            Value::Object(map) => map,
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().expect("just set")
            }
            _ => bail!("override key {key:?}: {:?} is not an object", parts[..i].join(".")),
        };
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("loop returns on the last component")
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

pub fn load(path: &Path, overrides: &[String]) -> Result<LoadedConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let mut value: Value = serde_json::from_str(&text)
        .with_context(|| format!("config {} is not valid JSON", path.display()))?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let mut config: PipelineConfig = serde_json::from_value(value.clone())
        .with_context(|| format!("invalid configuration in {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let p = &mut config.paths;
    resolve(base, &mut p.transcript);
    resolve(base, &mut p.output_dir);
    for x in [&mut p.model, &mut p.bold_dir, &mut p.roi_labels, &mut p.pos_tags].into_iter().flatten() {
        resolve(base, x);
    }
    validate(&config)?;
    let hash = hex::encode(Sha256::digest(serde_json::to_vec(&value)?));
    Ok(LoadedConfig { config, hash, effective: value })
}

fn validate(c: &PipelineConfig) -> Result<()> {
    c.encoder.validate().map_err(|e| anyhow!("{e}"))?;
    if c.attribution.window_len == 0 || c.attribution.steps_m == 0 {
        bail!("attribution.window_len and attribution.steps_m must be positive");
    }
    let s = &c.stats;
    for (name, q) in [("stats.q", s.q), ("stats.layer_q", s.layer_q)] {
        if !(q > 0.0 && q <= 1.0) {
            bail!("{name} = {q} must lie in (0, 1]");
        }
    }
    if let Some(syn) = &c.synthetic {
        if syn.sources.is_empty() {
            bail!("synthetic.sources must name at least one feature space");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_parse_json_or_string() {
        let mut v = json!({"a": {"b": 1}});
        apply_override(&mut v, "a.b=2.5").unwrap();
        apply_override(&mut v, "a.c=hello").unwrap();
        apply_override(&mut v, "d.e=[1,2]").unwrap();
        assert_eq!(v, json!({"a": {"b": 2.5, "c": "hello"}, "d": {"e": [1, 2]}}));
        assert!(apply_override(&mut v, "a.b.c=1").is_err());
        assert!(apply_override(&mut v, "novalue").is_err());
    }
}
