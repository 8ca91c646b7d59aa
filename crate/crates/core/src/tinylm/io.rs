//! Model save/load.
//!
//! One container file (see [`crate::dataio::container`]) whose JSON header
//! holds the format version, the [`ModelConfig`], the tensor order with
//! shapes, and optionally the vocabulary. The payload is every tensor of
//! [`Params::named_tensors`] in that order, each flattened row-major.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::model::{Model, Params};
use super::vocab::Vocabulary;
use crate::dataio::container;
use crate::error::{Error, Result};
use crate::linalg::{from_row_major, to_row_major};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    format: String,
    version: u32,
    config: ModelConfig,
    tensors: Vec<(String, [usize; 2])>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vocabulary: Option<Vocabulary>,
}

pub fn save_model(path: &Path, model: &Model, vocabulary: Option<&Vocabulary>) -> Result<()> {
    let named = model.params.named_tensors();
    let header = ModelHeader {
        format: "tinylm".into(),
        version: MODEL_FORMAT_VERSION,
        config: model.config.clone(),
        tensors: named.iter().map(|(n, t)| (n.clone(), [t.nrows(), t.ncols()])).collect(),
        vocabulary: vocabulary.cloned(),
    };
    let mut payload = Vec::with_capacity(model.params.count());
    for (_, t) in &named {
        payload.extend(to_row_major(t));
    }
    container::write_file(path, &header, &payload)
}

pub fn load_model(path: &Path) -> Result<(Model, Option<Vocabulary>)> {
    let (header, payload): (ModelHeader, Vec<f64>) = container::read_file(path, |h: &ModelHeader| {
        if h.format != "tinylm" {
            return Err(Error::Format(format!("not a model file (format {:?})", h.format)));
        }
        if h.version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported model version {}", h.version)));
        }
        Ok(h.config.param_count())
    })?;
    header.config.validate()?;
    let mut params = Params::zeros(&header.config);
    let expected: Vec<(String, [usize; 2])> =
        params.named_tensors().iter().map(|(n, t)| (n.clone(), [t.nrows(), t.ncols()])).collect();
    if expected != header.tensors {
        return Err(Error::Format("tensor table does not match the config".into()));
    }
    let mut offset = 0;
    for t in params.tensors_mut() {
        let (r, c) = t.shape();
        *t = from_row_major(r, c, &payload[offset..offset + r * c]);
        offset += r * c;
    }
    if !params.all_finite() {
        return Err(Error::Format("non-finite parameter values".into()));
    }
    Ok((Model::from_params(header.config, params)?, header.vocabulary))
}
