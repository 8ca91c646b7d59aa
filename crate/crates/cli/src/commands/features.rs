use anyhow::{bail, Result};
use attrib_core::attribution::Method;
use attrib_core::dataio::write_features;
use attrib_core::featurespace::{
    activation_features, attention_features, attribution_features, conductance_feature_set,
    conductance_features, FeatureMatrix,
};

use super::{features_path, load_lm, load_transcript};
use crate::config::{KindName, LoadedConfig};
use crate::stage::Stage;

/// Restricts the `features` stage; empty fields mean "as configured".
#[derive(Debug, Default, Clone)]
pub struct FeatureSelection {
    pub kind: Option<KindName>,
    pub method: Option<Method>,
    pub layer: Option<usize>,
}

pub fn features(cfg: &LoadedConfig, sel: &FeatureSelection) -> Result<()> {
    let transcript = load_transcript(cfg)?;
    let (model, vocab) = load_lm(cfg)?;
    let c = &cfg.config;
    let kinds: Vec<KindName> = match sel.kind {
        Some(k) => vec![k],
        None => c.feature_kinds.clone(),
    };
    let n_layers = model.config.n_layers;
    if let Some(l) = sel.layer {
        if l > n_layers {
            bail!("--layer {l} out of range 0..={n_layers}");
        }
    }
    let mut out: Vec<FeatureMatrix> = Vec::new();
    for kind in kinds {
        match kind {
            KindName::Attribution => {
                let methods = match sel.method {
                    Some(m) => vec![m],
                    None => c.methods.clone(),
                };
                for m in methods {
                    out.push(attribution_features(&transcript, &model, &vocab, m, &c.attribution)?);
                }
            }
            KindName::Conductance => match sel.layer {
                Some(l) => out.push(conductance_features(&transcript, &model, &vocab, l, &c.attribution)?),
                None => out.extend(conductance_feature_set(&transcript, &model, &vocab, &c.attribution)?),
            },
            KindName::Attention => out.push(attention_features(&transcript, &model, &vocab)?),
            KindName::Activation => {
                let layer = sel.layer.or(c.activation.layer).unwrap_or(n_layers);
                let context = c.activation.context_len.unwrap_or(model.config.max_seq_len);
                out.push(activation_features(&transcript, &model, &vocab, layer, context)?);
            }
        }
    }
    let mut stage = Stage::begin(cfg.output_dir(), "features")?;
    for f in &out {
        write_features(&stage.file(&features_path(cfg, &f.kind.label()))?, f)?;
        eprintln!("features: {} {} x {}", f.kind, f.n_rows(), f.n_cols());
    }
    stage.commit(cfg)?;
    Ok(())
}
